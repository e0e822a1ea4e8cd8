//! Marker-based watershed (Meyer flooding) over the depth-gradient magnitude.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::RegionLabelMap;
use crate::depth_io::DepthMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WatershedParams {
    /// Gradient bucket width in mm/pixel. Minima are searched on the
    /// bucketed gradient so that residual sensor noise inside flat surfaces
    /// does not seed spurious basins.
    pub gradient_quantum: f64,
}

impl Default for WatershedParams {
    fn default() -> Self {
        WatershedParams { gradient_quantum: 64.0 }
    }
}

/// Central-difference gradient magnitude; one-sided at the frame edge.
pub fn gradient_magnitude(frame: &DepthMap) -> Vec<f64> {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let v = frame.values();
    let at = |x: usize, y: usize| f64::from(v[y * w + x]);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
            let gx = (at(xr, y) - at(xl, y)) / 2.0;
            let gy = (at(x, yd) - at(x, yu)) / 2.0;
            out[y * w + x] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

pub fn watershed_segment(frame: &DepthMap) -> RegionLabelMap {
    watershed_segment_with(frame, &WatershedParams::default())
}

fn neighbours4(p: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (p % w, p / w);
    [
        (y > 0).then(|| p - w),
        (x > 0).then(|| p - 1),
        (x + 1 < w).then(|| p + 1),
        (y + 1 < h).then(|| p + w),
    ]
    .into_iter()
    .flatten()
}

/// Partitions the frame into catchment basins. Every pixel receives a label
/// `>= 1`; basins are 4-connected and numbered in raster order of their seed.
pub fn watershed_segment_with(frame: &DepthMap, params: &WatershedParams) -> RegionLabelMap {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let n = w * h;
    let grad = gradient_magnitude(frame);
    let quantum = params.gradient_quantum.max(f64::MIN_POSITIVE);
    let level: Vec<u32> = grad.iter().map(|g| (g / quantum).floor() as u32).collect();

    // regional minima: 4-connected equal-level plateaus without a lower neighbour
    let mut labels = vec![0u32; n];
    let mut plateau = vec![u32::MAX; n];
    let mut next_label = 1u32;
    let mut queue = VecDeque::new();
    let mut members = Vec::new();
    for seed in 0..n {
        if plateau[seed] != u32::MAX {
            continue;
        }
        plateau[seed] = seed as u32;
        queue.push_back(seed);
        members.clear();
        let mut is_min = true;
        while let Some(p) = queue.pop_front() {
            members.push(p);
            for q in neighbours4(p, w, h) {
                if level[q] < level[p] {
                    is_min = false;
                } else if level[q] == level[p] && plateau[q] == u32::MAX {
                    plateau[q] = seed as u32;
                    queue.push_back(q);
                }
            }
        }
        if is_min {
            for &p in &members {
                labels[p] = next_label;
            }
            next_label += 1;
        }
    }

    // priority flood, lowest gradient first, FIFO among equals
    let key = |p: usize| (grad[p] * 16.0).round() as u64;
    let mut heap = BinaryHeap::new();
    let mut queued = vec![false; n];
    let mut seq = 0u64;
    for p in 0..n {
        if labels[p] == 0 {
            continue;
        }
        for q in neighbours4(p, w, h) {
            if labels[q] == 0 && !queued[q] {
                queued[q] = true;
                heap.push(Reverse((key(q), seq, q)));
                seq += 1;
            }
        }
    }
    while let Some(Reverse((_, _, p))) = heap.pop() {
        let best = neighbours4(p, w, h)
            .filter(|&q| labels[q] != 0)
            .min_by_key(|&q| (key(q), labels[q]))
            .expect("queued pixels have a labelled neighbour");
        labels[p] = labels[best];
        for q in neighbours4(p, w, h) {
            if labels[q] == 0 && !queued[q] {
                queued[q] = true;
                heap.push(Reverse((key(q), seq, q)));
                seq += 1;
            }
        }
    }

    RegionLabelMap::new(frame.width(), frame.height(), labels)
}

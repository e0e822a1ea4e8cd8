//! Scenes and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use rgtrack::depth_io::{Actor, DepthMap, NoiseRecipe, SceneSpec};
use rgtrack::geometry::BBox;

/// Two actors crossing the frame on separate rows, with static noise blobs
/// so the mean-area threshold sits below both actors.
pub fn two_actor_scene(frames: usize) -> SceneSpec {
    SceneSpec::new(frames, 320, 240)
        .with_actor(Actor::rect(10, 20, 40, 40, 1500).moving(2, 0))
        .with_actor(Actor::rect(270, 170, 36, 36, 2500).moving(-2, 0))
        .with_noise(static_noise(6))
}

/// Near actor 1 moving left, far actor 2 moving right on the same rows.
/// They close 6 px per frame; the first frame they touch already overlaps.
pub fn occlusion_scene() -> SceneSpec {
    SceneSpec::new(30, 320, 240)
        .with_actor(Actor::rect(201, 100, 40, 40, 1200).moving(-3, 0))
        .with_actor(Actor::rect(40, 100, 40, 40, 3000).moving(3, 0))
        .with_noise(static_noise(6))
}

/// Four actors heading in four directions.
pub fn four_actor_scene() -> SceneSpec {
    SceneSpec::new(40, 320, 240)
        .with_actor(Actor::rect(10, 10, 30, 30, 1500).moving(3, 0))
        .with_actor(Actor::rect(280, 60, 30, 30, 2000).moving(-3, 0))
        .with_actor(Actor::rect(60, 200, 28, 28, 2500).moving(0, -3))
        .with_actor(Actor::rect(200, 90, 26, 26, 3000).moving(0, 3))
        .with_noise(static_noise(8))
}

pub fn static_noise(count: usize) -> NoiseRecipe {
    NoiseRecipe { blob_count: count, blob_area: [60, 300], static_blobs: true, ..NoiseRecipe::default() }
}

/// 4-connected components of pixels nearer than `threshold`.
pub fn component_count(frame: &DepthMap, threshold: u16) -> usize {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let fg: Vec<bool> = frame.values().iter().map(|&v| v < threshold).collect();
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for s in 0..w * h {
        if !fg[s] || seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            let mut near = Vec::with_capacity(4);
            if x > 0 {
                near.push(p - 1);
            }
            if x + 1 < w {
                near.push(p + 1);
            }
            if y > 0 {
                near.push(p - w);
            }
            if y + 1 < h {
                near.push(p + w);
            }
            for q in near {
                if fg[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    count
}

/// `|b \ a|` by hashing.
pub fn set_difference(a: &[u32], b: &[u32]) -> usize {
    let a: HashSet<u32> = a.iter().copied().collect();
    b.iter().filter(|p| !a.contains(p)).count()
}

/// Pixel IoU by hashing.
pub fn pixel_iou(a: &[u32], b: &[u32]) -> f64 {
    let sa: HashSet<u32> = a.iter().copied().collect();
    let inter = b.iter().filter(|p| sa.contains(p)).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// Box IoU from corner coordinates.
pub fn box_iou(a: &BBox, b: &BBox) -> f64 {
    let ix = (a.x + a.w).min(b.x + b.w).saturating_sub(a.x.max(b.x));
    let iy = (a.y + a.h).min(b.y + b.h).saturating_sub(a.y.max(b.y));
    let inter = f64::from(ix) * f64::from(iy);
    inter / (f64::from(a.w) * f64::from(a.h) + f64::from(b.w) * f64::from(b.h) - inter)
}

/// Largest per-edge difference between two boxes.
pub fn edge_error(a: &BBox, b: &BBox) -> u32 {
    [
        a.x.abs_diff(b.x),
        a.y.abs_diff(b.y),
        (a.x + a.w).abs_diff(b.x + b.w),
        (a.y + a.h).abs_diff(b.y + b.h),
    ]
    .into_iter()
    .max()
    .unwrap()
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

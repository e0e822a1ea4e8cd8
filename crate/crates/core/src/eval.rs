//! Detection and tracking scores against ground truth.

use std::collections::BTreeMap;

use crate::depth_io::GroundTruth;
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::tracker::{TrackRecord, TrackStatus};

pub const DEFAULT_R_MIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl std::ops::AddAssign for DetectionCounts {
    fn add_assign(&mut self, o: Self) {
        self.true_positives += o.true_positives;
        self.false_positives += o.false_positives;
        self.false_negatives += o.false_negatives;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Intersection over union of two pixel boxes.
pub fn overlap_ratio(t: &BBox, g: &BBox) -> Result<f64> {
    t.iou(g)
}

/// Greedy one-to-one pairing by descending overlap (ties by index). Returns
/// `(pred index, gt index, overlap)` for every pair with positive overlap.
fn greedy_pairs(pred: &[BBox], gt: &[BBox]) -> Result<Vec<(usize, usize, f64)>> {
    let mut all = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let r = overlap_ratio(p, g)?;
            if r > 0.0 {
                all.push((i, j, r));
            }
        }
    }
    all.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let (mut used_p, mut used_g) = (vec![false; pred.len()], vec![false; gt.len()]);
    let mut out = Vec::new();
    for (i, j, r) in all {
        if !used_p[i] && !used_g[j] {
            used_p[i] = true;
            used_g[j] = true;
            out.push((i, j, r));
        }
    }
    Ok(out)
}

/// Pairs are taken greedily by descending overlap; a pair is a true
/// positive when its overlap reaches `r_min`.
pub fn match_detections(pred: &[BBox], gt: &[BBox], r_min: f64) -> Result<DetectionCounts> {
    let tp = greedy_pairs(pred, gt)?.iter().filter(|p| p.2 >= r_min).count();
    Ok(DetectionCounts {
        true_positives: tp,
        false_positives: pred.len() - tp,
        false_negatives: gt.len() - tp,
    })
}

/// Harmonic mean of precision and recall; both are 0 where undefined.
pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn f1_score(c: &DetectionCounts) -> Scores {
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let precision = ratio(c.true_positives, c.true_positives + c.false_positives);
    let recall = ratio(c.true_positives, c.true_positives + c.false_negatives);
    Scores { precision, recall, f1: f1_from(precision, recall) }
}

/// Overlap of the track box paired with every ground-truth object in every
/// ground-truth frame from `first_frame` on (0 for unpaired objects). Lost
/// records carry no box.
pub fn matched_overlaps(tracks: &[TrackRecord], gt: &GroundTruth, first_frame: usize) -> Result<Vec<f64>> {
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let mut by_frame: BTreeMap<usize, Vec<BBox>> = BTreeMap::new();
    for r in tracks.iter().filter(|r| r.status != TrackStatus::Lost) {
        by_frame.entry(r.frame_index).or_default().push(r.bbox);
    }
    let mut out = Vec::new();
    for (frame, boxes) in gt.by_frame().range(first_frame..) {
        let pred = by_frame.get(frame).map_or(&[][..], Vec::as_slice);
        let mut best = vec![0.0; boxes.len()];
        for (_, j, r) in greedy_pairs(pred, boxes)? {
            best[j] = r;
        }
        out.extend(best);
    }
    Ok(out)
}

fn first_frame(tracks: &[TrackRecord]) -> usize {
    tracks.iter().map(|r| r.frame_index).min().unwrap_or(0)
}

/// Fraction of (frame, object) pairs tracked with overlap strictly above
/// `r_min`, over ground-truth frames from the first frame of the stream.
pub fn success_rate(tracks: &[TrackRecord], gt: &GroundTruth, r_min: f64) -> Result<f64> {
    success_rate_since(tracks, gt, r_min, first_frame(tracks))
}

pub fn success_rate_since(tracks: &[TrackRecord], gt: &GroundTruth, r_min: f64, first_frame: usize) -> Result<f64> {
    let o = matched_overlaps(tracks, gt, first_frame)?;
    Ok(rate_above(&o, r_min))
}

fn rate_above(overlaps: &[f64], r: f64) -> f64 {
    if overlaps.is_empty() {
        return 0.0;
    }
    overlaps.iter().filter(|&&o| o > r).count() as f64 / overlaps.len() as f64
}

/// `(threshold, success rate)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct SrCurve {
    pub points: Vec<(f64, f64)>,
}

impl SrCurve {
    pub fn is_non_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

pub fn sr_curve(tracks: &[TrackRecord], gt: &GroundTruth, thresholds: &[f64]) -> Result<SrCurve> {
    sr_curve_since(tracks, gt, thresholds, first_frame(tracks))
}

pub fn sr_curve_since(tracks: &[TrackRecord], gt: &GroundTruth, thresholds: &[f64], first_frame: usize) -> Result<SrCurve> {
    if thresholds.windows(2).any(|w| w[1] < w[0]) || thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidParameter("thresholds must be ascending within [0, 1]".into()));
    }
    let o = matched_overlaps(tracks, gt, first_frame)?;
    Ok(SrCurve { points: thresholds.iter().map(|&t| (t, rate_above(&o, t))).collect() })
}

/// `0.0, step, 2·step, …` up to and including 1.
pub fn threshold_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|i| (i as f64 * step * 1e6).round() / 1e6).collect()
}

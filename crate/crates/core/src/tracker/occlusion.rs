use super::RoiTrack;
use crate::error::{Error, Result};

/// One evaluated track pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionReport {
    pub frame_index: usize,
    pub occludee: u32,
    pub occluder: u32,
    /// Boundary gap in pixels; 0 when the masks touch or overlap.
    pub d_e: f64,
    /// Area change entering the score (the occluder's).
    pub delta_area: usize,
    pub occludee_delta_area: usize,
    pub od: f64,
    pub flagged: bool,
}

/// `ΔA / (e^{-|d_e|} + 1)`.
pub fn occlusion_score(delta_area: usize, d_e: f64) -> f64 {
    delta_area as f64 / ((-d_e.abs()).exp() + 1.0)
}

fn contains(mask: &[u32], p: i64) -> bool {
    p >= 0 && mask.binary_search(&(p as u32)).is_ok()
}

fn neighbours8(p: u32, width: u32) -> impl Iterator<Item = i64> {
    let (x, y, w) = (i64::from(p % width), i64::from(p / width), i64::from(width));
    (-1..=1).flat_map(move |dy| {
        (-1..=1).filter_map(move |dx| {
            let nx = x + dx;
            ((dx, dy) != (0, 0) && nx >= 0 && nx < w).then_some((y + dy) * w + nx)
        })
    })
}

fn boundary(mask: &[u32], width: u32) -> Vec<u32> {
    mask.iter()
        .copied()
        .filter(|&p| {
            let x = p % width;
            x == 0 || x + 1 == width || neighbours8(p, width).any(|q| !contains(mask, q))
        })
        .collect()
}

/// Smallest Euclidean distance between the boundary pixels of two masks,
/// or 0 if they overlap or are 8-adjacent.
pub fn mask_gap(a: &[u32], b: &[u32], width: u32) -> f64 {
    let ba = boundary(a, width);
    let touching = ba
        .iter()
        .any(|&p| contains(b, i64::from(p)) || neighbours8(p, width).any(|q| contains(b, q)));
    if touching || crate::geometry::intersection_count(a, b) > 0 {
        return 0.0;
    }
    let bb = boundary(b, width);
    let mut best = u64::MAX;
    for &p in &ba {
        let (px, py) = (i64::from(p % width), i64::from(p / width));
        for &q in &bb {
            let (qx, qy) = (i64::from(q % width), i64::from(q / width));
            best = best.min(((px - qx).pow(2) + (py - qy).pow(2)) as u64);
        }
    }
    if best == u64::MAX {
        f64::INFINITY
    } else {
        (best as f64).sqrt()
    }
}

/// Gap between the latest masks of two tracks.
pub fn euclidean_gap(a: &RoiTrack, b: &RoiTrack, width: u32) -> f64 {
    mask_gap(&a.last().mask, &b.last().mask, width)
}

/// `|A(t) - A(t-1)|` over the track's last two frames.
pub fn area_change(track: &RoiTrack) -> Result<usize> {
    let h = track.history();
    if h.len() < 2 {
        return Err(Error::InsufficientHistory { needed: 2, have: h.len() });
    }
    Ok(h[h.len() - 1].area.abs_diff(h[h.len() - 2].area))
}

/// Scores a pair of tracks. The track with the larger area change is the
/// occludee (lower id on ties); the score uses the other track's change, and
/// the pair is flagged when the masks touch and the score is below `iota`.
pub fn detect_occlusion(a: &RoiTrack, b: &RoiTrack, iota: f64, width: u32) -> Result<OcclusionReport> {
    let (da, db) = (area_change(a)?, area_change(b)?);
    let a_is_occludee = da > db || (da == db && a.id() < b.id());
    let (occludee, occluder, d_occludee, d_occluder) = if a_is_occludee {
        (a.id(), b.id(), da, db)
    } else {
        (b.id(), a.id(), db, da)
    };
    let d_e = euclidean_gap(a, b, width);
    let od = occlusion_score(d_occluder, d_e);
    Ok(OcclusionReport {
        frame_index: a.last().frame_index,
        occludee,
        occluder,
        d_e,
        delta_area: d_occluder,
        occludee_delta_area: d_occludee,
        od,
        flagged: d_e == 0.0 && od < iota,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::TrackStatus;

    const W: u32 = 100;

    fn rect(x: u32, y: u32, w: u32, h: u32) -> Vec<u32> {
        let mut v = Vec::new();
        for yy in y..y + h {
            for xx in x..x + w {
                v.push(yy * W + xx);
            }
        }
        v
    }

    fn track(id: u32, masks: &[Vec<u32>]) -> RoiTrack {
        let mut t = RoiTrack::born(id, 0, masks[0].clone(), W, None);
        for (i, m) in masks.iter().enumerate().skip(1) {
            t.push_frame(i, m.clone(), W, TrackStatus::Active);
        }
        t
    }

    /// All-pairs distance over every pixel of both masks.
    fn brute_gap(a: &[u32], b: &[u32]) -> f64 {
        let mut best = f64::INFINITY;
        for &p in a {
            for &q in b {
                let dx = f64::from(p % W) - f64::from(q % W);
                let dy = f64::from(p / W) - f64::from(q / W);
                best = best.min((dx * dx + dy * dy).sqrt());
            }
        }
        best
    }

    #[test]
    fn gap_examples() {
        assert_eq!(mask_gap(&rect(0, 0, 5, 5), &rect(3, 3, 5, 5), W), 0.0);
        assert_eq!(mask_gap(&[0], &[4 * W + 3], W), 5.0);
        let (a, b) = (rect(10, 10, 10, 10), rect(29, 10, 10, 10));
        assert_eq!(mask_gap(&a, &b, W), 10.0);
        assert_eq!(mask_gap(&a, &b, W), brute_gap(&a, &b));
        // diagonal contact counts as touching
        assert_eq!(mask_gap(&rect(0, 0, 2, 2), &rect(2, 2, 2, 2), W), 0.0);
    }

    #[test]
    fn gap_matches_brute_force_and_is_symmetric() {
        let shapes = [rect(5, 5, 8, 3), rect(30, 2, 4, 9), rect(14, 20, 6, 6), rect(60, 60, 1, 1), rect(13, 8, 3, 3)];
        for a in &shapes {
            for b in &shapes {
                if a == b {
                    continue;
                }
                let g = mask_gap(a, b, W);
                assert_eq!(g, mask_gap(b, a, W));
                let oracle = brute_gap(a, b);
                if oracle <= 2f64.sqrt() {
                    assert_eq!(g, 0.0);
                } else {
                    assert!((g - oracle).abs() < 1e-12, "{g} vs {oracle}");
                }
            }
        }
    }

    #[test]
    fn area_change_examples() {
        let constant = track(1, &[rect(0, 0, 100, 100), rect(0, 0, 100, 100)]);
        assert_eq!(area_change(&constant).unwrap(), 0);
        let grow = track(1, &[rect(0, 0, 100, 100), rect(0, 0, 100, 104)]);
        assert_eq!(area_change(&grow).unwrap(), 400);
        let shrink = track(1, &[rect(0, 0, 100, 100), rect(0, 0, 100, 95)]);
        assert_eq!(area_change(&shrink).unwrap(), 500);
        let single = track(1, &[rect(0, 0, 10, 10)]);
        assert!(area_change(&single).is_err());
    }

    #[test]
    fn score_formula() {
        assert_eq!(occlusion_score(100, 0.0), 50.0);
        assert_eq!(occlusion_score(0, 37.0), 0.0);
        let far = occlusion_score(100, 20.0);
        assert!(far < 100.0 && far > 99.999_99);
    }

    #[test]
    fn zero_change_apart_is_not_flagged() {
        let a = track(1, &[rect(0, 0, 10, 10), rect(1, 0, 10, 10)]);
        let b = track(2, &[rect(60, 0, 10, 10), rect(60, 0, 10, 10)]);
        let r = detect_occlusion(&a, &b, 0.4, W).unwrap();
        assert!(r.d_e > 0.0);
        assert_eq!(r.od, 0.0);
        assert!(!r.flagged);
    }

    #[test]
    fn both_changing_while_touching_is_not_flagged() {
        // OD = 100 / 2 = 50 for the smaller change
        let a = track(1, &[rect(0, 0, 20, 20), rect(0, 0, 20, 25)]);
        let b = track(2, &[rect(20, 0, 20, 20), rect(20, 0, 20, 15)]);
        let r = detect_occlusion(&a, &b, 0.4, W).unwrap();
        assert_eq!(r.d_e, 0.0);
        assert_eq!(r.delta_area, 100);
        assert_eq!(r.od, 50.0);
        assert!(!r.flagged);
    }

    #[test]
    fn shrinking_track_behind_static_one_is_occludee() {
        let a = track(1, &[rect(0, 0, 20, 20), rect(0, 0, 20, 20)]);
        let b = track(2, &[rect(20, 0, 20, 20), rect(20, 0, 16, 20)]);
        let r = detect_occlusion(&a, &b, 0.4, W).unwrap();
        assert!(r.flagged);
        assert_eq!((r.occludee, r.occluder), (2, 1));
        assert_eq!(r.occludee_delta_area, 80);
        let r2 = detect_occlusion(&b, &a, 0.4, W).unwrap();
        assert_eq!((r2.occludee, r2.occluder), (2, 1));
    }

    #[test]
    fn tie_makes_lower_id_occludee() {
        let a = track(7, &[rect(0, 0, 20, 20), rect(0, 0, 20, 20)]);
        let b = track(3, &[rect(20, 0, 20, 20), rect(20, 0, 20, 20)]);
        let r = detect_occlusion(&a, &b, 0.4, W).unwrap();
        assert_eq!((r.occludee, r.occluder), (3, 7));
    }

    #[test]
    fn od_bounds() {
        for da in [0usize, 1, 10, 400, 10_000] {
            for de in [0.0, 0.5, 1.0, 3.0, 10.0, 30.0, 50.0] {
                let od = occlusion_score(da, de);
                if da == 0 {
                    assert_eq!(od, 0.0);
                } else if de < 36.0 {
                    assert!(od >= da as f64 / 2.0 && od < da as f64, "{da} {de} {od}");
                } else {
                    // e^{-d} + 1 rounds to 1 in f64
                    assert_eq!(od, da as f64);
                }
            }
        }
    }
}

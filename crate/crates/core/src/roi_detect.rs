//! Temporal region association and ROI detection.
//!
//! Closed regions of consecutive frames are paired by mask overlap. The
//! displacement of a pair is the number of pixels the newer mask gained
//! over the older one. Summing displacements along a chain of pairs over
//! the first `K` frames tells moving, growing and shrinking regions apart
//! from static ones.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{centroid, difference};
use crate::noise_filter::{Region, RegionSet};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_DELTA: usize = 80;
pub const DEFAULT_ROI_THRESHOLD: usize = 70;

/// `|mask(b) \ mask(a)|`.
pub fn displacement(a: &Region, b: &Region) -> usize {
    difference(&b.pixels, &a.pixels).len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cardinal {
    North,
    East,
    South,
    West,
}

impl Cardinal {
    pub const ALL: [Cardinal; 4] = [Cardinal::North, Cardinal::East, Cardinal::South, Cardinal::West];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    /// Unit step in image coordinates `(col, row)`.
    pub fn unit(self) -> (i32, i32) {
        match self {
            Cardinal::North => (0, -1),
            Cardinal::East => (1, 0),
            Cardinal::South => (0, 1),
            Cardinal::West => (-1, 0),
        }
    }

    fn letter(self) -> char {
        match self {
            Cardinal::North => 'N',
            Cardinal::East => 'E',
            Cardinal::South => 'S',
            Cardinal::West => 'W',
        }
    }
}

/// One cardinal, or two adjacent ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CardinalDirection(u8);

impl CardinalDirection {
    pub fn single(c: Cardinal) -> Self {
        CardinalDirection(c.bit())
    }

    pub fn pair(a: Cardinal, b: Cardinal) -> Result<Self> {
        let opposite = matches!(
            (a, b),
            (Cardinal::North, Cardinal::South)
                | (Cardinal::South, Cardinal::North)
                | (Cardinal::East, Cardinal::West)
                | (Cardinal::West, Cardinal::East)
        );
        if a == b || opposite {
            return Err(Error::InvalidParameter(format!("{a:?}+{b:?} is not a compass direction")));
        }
        Ok(CardinalDirection(a.bit() | b.bit()))
    }

    pub fn contains(&self, c: Cardinal) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn cardinals(&self) -> impl Iterator<Item = Cardinal> + '_ {
        Cardinal::ALL.into_iter().filter(|&c| self.contains(c))
    }
}

impl fmt::Display for CardinalDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // conventional order: N/S before E/W
        for c in [Cardinal::North, Cardinal::South, Cardinal::East, Cardinal::West] {
            if self.contains(c) {
                write!(f, "{}", c.letter())?;
            }
        }
        Ok(())
    }
}

/// Direction of the region's growth from `prev` to `curr`: the centroid of
/// `curr \ prev` relative to the centroid of `curr`. Offsets within 22.5° of
/// an axis give one cardinal, others the two adjacent ones.
pub fn estimate_direction(prev: &Region, curr: &Region, width: u32) -> Result<CardinalDirection> {
    direction_between(&prev.pixels, &curr.pixels, width)
}

/// [`estimate_direction`] on bare sorted masks.
pub fn direction_between(prev: &[u32], curr: &[u32], width: u32) -> Result<CardinalDirection> {
    let diff = difference(curr, prev);
    let Some((dc, dr)) = centroid(&diff, width) else {
        return Err(Error::ZeroDisplacement);
    };
    let (cc, cr) = centroid(curr, width).expect("curr contains the difference");
    let (east, north) = (dc - cc, cr - dr);
    if east.abs() < 1e-9 && north.abs() < 1e-9 {
        return Err(Error::UndeterminedDirection);
    }
    let angle = north.atan2(east).to_degrees().rem_euclid(360.0);
    let axis = [(0.0, Cardinal::East), (90.0, Cardinal::North), (180.0, Cardinal::West), (270.0, Cardinal::South), (360.0, Cardinal::East)];
    for (deg, c) in axis {
        if (angle - deg).abs() <= 22.5 {
            return Ok(CardinalDirection::single(c));
        }
    }
    let ns = if north > 0.0 { Cardinal::North } else { Cardinal::South };
    let ew = if east > 0.0 { Cardinal::East } else { Cardinal::West };
    CardinalDirection::pair(ns, ew)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPair {
    pub prev: u32,
    pub curr: u32,
    pub overlap: usize,
    pub displacement: usize,
    pub moving: bool,
    /// `None` when the pair has no displacement or a centred difference.
    pub direction: Option<CardinalDirection>,
}

/// One-to-one association between the closed regions of two frames.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMapping {
    pub prev_frame: usize,
    pub curr_frame: usize,
    /// Sorted by `prev`.
    pub pairs: Vec<RegionPair>,
}

impl RegionMapping {
    pub fn forward(&self, prev: u32) -> Option<&RegionPair> {
        self.pairs
            .binary_search_by_key(&prev, |p| p.prev)
            .ok()
            .map(|i| &self.pairs[i])
    }

    pub fn backward(&self, curr: u32) -> Option<&RegionPair> {
        self.pairs.iter().find(|p| p.curr == curr)
    }
}

/// Pixel-overlap counts between closed regions of two frames, keyed by
/// `(prev id, curr id)`.
pub fn overlap_counts(prev: &RegionSet, curr: &RegionSet) -> HashMap<(u32, u32), usize> {
    let pc = prev.closed_lookup();
    let cc = curr.closed_lookup();
    let closed = |lut: &[bool], l: u32| lut.get(l as usize).copied().unwrap_or(false);
    let mut counts = HashMap::new();
    for (&a, &b) in prev.labels.iter().zip(&curr.labels) {
        if closed(&pc, a) && closed(&cc, b) {
            *counts.entry((a, b)).or_insert(0) += 1;
        }
    }
    counts
}

/// Greedy one-to-one association of closed regions by descending overlap
/// (ties: smaller displacement, then lower ids). Regions without any
/// overlap stay unmatched.
pub fn map_regions(prev: &RegionSet, curr: &RegionSet, delta: usize) -> Result<RegionMapping> {
    if (prev.width, prev.height) != (curr.width, curr.height) {
        return Err(Error::FrameSizeMismatch {
            expected_w: prev.width,
            expected_h: prev.height,
            found_w: curr.width,
            found_h: curr.height,
        });
    }
    let mut cands: Vec<(u32, u32, usize, usize)> = overlap_counts(prev, curr)
        .into_iter()
        .map(|((a, b), o)| {
            let area = curr.region(b).expect("closed label has a region").area();
            (a, b, o, area - o)
        })
        .collect();
    cands.sort_by(|x, y| y.2.cmp(&x.2).then(x.3.cmp(&y.3)).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));

    let mut used_prev = std::collections::HashSet::new();
    let mut used_curr = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    for (a, b, overlap, disp) in cands {
        if used_prev.contains(&a) || used_curr.contains(&b) {
            continue;
        }
        used_prev.insert(a);
        used_curr.insert(b);
        let direction = if disp > 0 {
            let (ra, rb) = (prev.region(a).expect("region"), curr.region(b).expect("region"));
            estimate_direction(ra, rb, curr.width).ok()
        } else {
            None
        };
        pairs.push(RegionPair { prev: a, curr: b, overlap, displacement: disp, moving: disp > delta, direction });
    }
    pairs.sort_by_key(|p| p.prev);
    Ok(RegionMapping { prev_frame: prev.frame_index, curr_frame: curr.frame_index, pairs })
}

/// A chain of associated regions through consecutive frames.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiCandidate {
    /// Frame index of `lineage[0]`.
    pub start_frame: usize,
    /// Region ids, one per frame from `start_frame` on.
    pub lineage: Vec<u32>,
    pub accumulated: usize,
    pub is_roi: bool,
    /// Direction of the most recent displaced step.
    pub direction: Option<CardinalDirection>,
}

impl RoiCandidate {
    pub fn end_frame(&self) -> usize {
        self.start_frame + self.lineage.len() - 1
    }

    pub fn last_region(&self) -> u32 {
        *self.lineage.last().expect("lineage is non-empty")
    }
}

/// Chains `mappings` (consecutive frame pairs) into lineages and marks every
/// lineage whose summed displacement exceeds `roi_threshold`. A lineage
/// starts at any region not continued from the previous mapping and ends at
/// the first step without a match.
pub fn detect_rois(mappings: &[RegionMapping], roi_threshold: usize) -> Result<Vec<RoiCandidate>> {
    if mappings.is_empty() {
        return Err(Error::InsufficientHistory { needed: 2, have: 1 });
    }
    let mut out = Vec::new();
    for (i, m) in mappings.iter().enumerate() {
        for start in &m.pairs {
            if i > 0 && mappings[i - 1].backward(start.prev).is_some() {
                continue;
            }
            let mut lineage = vec![start.prev];
            let mut accumulated = 0;
            let mut direction = None;
            let mut id = start.prev;
            for step in &mappings[i..] {
                let Some(pair) = step.forward(id) else { break };
                accumulated += pair.displacement;
                if pair.direction.is_some() {
                    direction = pair.direction;
                }
                id = pair.curr;
                lineage.push(id);
            }
            out.push(RoiCandidate {
                start_frame: m.prev_frame,
                lineage,
                accumulated,
                is_roi: accumulated > roi_threshold,
                direction,
            });
        }
    }
    Ok(out)
}

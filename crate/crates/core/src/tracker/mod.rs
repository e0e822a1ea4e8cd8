//! Multi-ROI tracking over noise-suppressed region sets.
//!
//! The first `K` frames only feed ROI detection. From frame `K` on, each
//! active track looks for its region in the new frame among the weight-1
//! neighbours of the region it was mapped to, narrowed by its direction of
//! motion when optimisation is on. A candidate is accepted once it holds
//! more than half of the previous mask, which no other disjoint region can
//! beat; otherwise the search widens to the full neighbour set and then to
//! the whole frame. Every `K` frames the ROI set is re-detected: tracks no
//! longer on a moving lineage are dropped and unclaimed ROIs start new
//! tracks.

mod occlusion;

pub use occlusion::{area_change, detect_occlusion, euclidean_gap, mask_gap, occlusion_score, OcclusionReport};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{intersection_count, BBox};
use crate::noise_filter::RegionSet;
use crate::region_graph::{assign_weights, build_graph, candidate_regions, node_table, RegionGraph};
use crate::roi_detect::{
    detect_rois, direction_between, map_regions, CardinalDirection, RegionMapping, DEFAULT_DELTA, DEFAULT_K,
    DEFAULT_ROI_THRESHOLD,
};

pub const DEFAULT_IOTA: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerParams {
    pub k: usize,
    pub delta: usize,
    pub roi_threshold: usize,
    pub iota: f64,
    /// Search direction-pruned candidates first.
    pub optimize: bool,
    /// Run per-track searches on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for TrackerParams {
    fn default() -> Self {
        TrackerParams {
            k: DEFAULT_K,
            delta: DEFAULT_DELTA,
            roi_threshold: DEFAULT_ROI_THRESHOLD,
            iota: DEFAULT_IOTA,
            optimize: true,
            parallel: true,
        }
    }
}

impl TrackerParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!("K must be at least 2, got {}", self.k)));
        }
        if !(self.iota > 0.0 && self.iota < 1.0) {
            return Err(Error::InvalidParameter(format!("iota must lie in (0, 1), got {}", self.iota)));
        }
        if self.delta == 0 || self.roi_threshold == 0 {
            return Err(Error::InvalidParameter("delta and roi threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Active,
    Occluded { by: u32 },
    Lost,
}

impl fmt::Display for TrackStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackStatus::Active => f.write_str("active"),
            TrackStatus::Occluded { by } => write!(f, "occluded:{by}"),
            TrackStatus::Lost => f.write_str("lost"),
        }
    }
}

impl FromStr for TrackStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "active" => Ok(TrackStatus::Active),
            "lost" => Ok(TrackStatus::Lost),
            _ => s
                .strip_prefix("occluded:")
                .and_then(|id| id.parse().ok())
                .map(|by| TrackStatus::Occluded { by })
                .ok_or_else(|| Error::format("track status", s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackFrame {
    pub frame_index: usize,
    /// Sorted row-major pixel indices.
    pub mask: Vec<u32>,
    pub bbox: BBox,
    pub area: usize,
    pub status: TrackStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoiTrack {
    id: u32,
    history: Vec<TrackFrame>,
    directions: Vec<Option<CardinalDirection>>,
    status: TrackStatus,
    /// Region holding the track in the latest frame, while active.
    region: Option<u32>,
    occluded_for: usize,
    lost_at: Option<usize>,
}

impl RoiTrack {
    pub(crate) fn born(id: u32, frame_index: usize, mask: Vec<u32>, width: u32, direction: Option<CardinalDirection>) -> Self {
        let mut t = RoiTrack {
            id,
            history: Vec::new(),
            directions: Vec::new(),
            status: TrackStatus::Active,
            region: None,
            occluded_for: 0,
            lost_at: None,
        };
        t.push_frame(frame_index, mask, width, TrackStatus::Active);
        t.directions[0] = direction;
        t
    }

    pub(crate) fn push_frame(&mut self, frame_index: usize, mask: Vec<u32>, width: u32, status: TrackStatus) {
        let direction = self
            .history
            .last()
            .and_then(|prev| direction_between(&prev.mask, &mask, width).ok());
        let bbox = BBox::from_pixels(&mask, width).expect("track masks are non-empty");
        self.history.push(TrackFrame { frame_index, area: mask.len(), bbox, mask, status });
        self.directions.push(direction);
        self.status = status;
    }

    fn lose(&mut self, frame_index: usize) {
        self.status = TrackStatus::Lost;
        self.region = None;
        self.lost_at = Some(frame_index);
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn status(&self) -> TrackStatus {
        self.status
    }

    pub fn history(&self) -> &[TrackFrame] {
        &self.history
    }

    pub fn last(&self) -> &TrackFrame {
        self.history.last().expect("tracks are born with one frame")
    }

    pub fn birth_frame(&self) -> usize {
        self.history[0].frame_index
    }

    /// Frame at which the track was dropped, if it was.
    pub fn lost_at(&self) -> Option<usize> {
        self.lost_at
    }

    pub fn frame(&self, frame_index: usize) -> Option<&TrackFrame> {
        let i = frame_index.checked_sub(self.birth_frame())?;
        self.history.get(i).filter(|f| f.frame_index == frame_index)
    }

    pub fn mask_at(&self, frame_index: usize) -> Option<&[u32]> {
        self.frame(frame_index).map(|f| f.mask.as_slice())
    }

    pub fn area_history(&self) -> Vec<usize> {
        self.history.iter().map(|f| f.area).collect()
    }

    /// Per-frame direction of motion; `None` where it was undefined.
    pub fn direction_history(&self) -> &[Option<CardinalDirection>] {
        &self.directions
    }

    /// Most recent defined direction.
    pub fn direction(&self) -> Option<CardinalDirection> {
        self.directions.iter().rev().find_map(|d| *d)
    }
}

/// One line of the track stream: `frame track status x y w h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackRecord {
    pub frame_index: usize,
    pub track_id: u32,
    pub status: TrackStatus,
    pub bbox: BBox,
}

impl fmt::Display for TrackRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.bbox;
        write!(f, "{} {} {} {} {} {} {}", self.frame_index, self.track_id, self.status, b.x, b.y, b.w, b.h)
    }
}

impl TrackRecord {
    pub fn parse_stream(text: &str) -> Result<Vec<TrackRecord>> {
        let mut out = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 7 {
                return Err(Error::format("track record", line));
            }
            let n = |s: &str| s.parse::<u32>().map_err(|_| Error::format("track record", line));
            out.push(TrackRecord {
                frame_index: n(t[0])? as usize,
                track_id: n(t[1])?,
                status: t[2].parse()?,
                bbox: BBox::new(n(t[3])?, n(t[4])?, n(t[5])?, n(t[6])?),
            });
        }
        Ok(out)
    }
}

pub fn records_to_text(records: &[TrackRecord]) -> String {
    records.iter().map(|r| format!("{r}\n")).collect()
}

/// How far a search had to widen before it settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchTier {
    Pruned,
    Neighbours,
    Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchStats {
    pub frame_index: usize,
    pub track_id: u32,
    /// Direction-pruned weight-1 candidates.
    pub pruned: usize,
    /// Unpruned weight-1 candidates.
    pub full: usize,
    /// Regions whose overlap was actually computed.
    pub examined: usize,
    pub tier: SearchTier,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameOutput {
    pub frame_index: usize,
    pub records: Vec<TrackRecord>,
    pub occlusions: Vec<OcclusionReport>,
    pub search: Vec<SearchStats>,
}

struct Outcome {
    best: Option<(u32, usize)>,
    stats: Option<SearchStats>,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    params: TrackerParams,
    size: Option<(u32, u32)>,
    window: VecDeque<RegionSet>,
    mappings: VecDeque<RegionMapping>,
    tracks: Vec<RoiTrack>,
    next_id: u32,
    frames_seen: usize,
    since_refresh: usize,
}

impl Tracker {
    pub fn new(params: TrackerParams) -> Result<Self> {
        params.validate()?;
        Ok(Tracker {
            params,
            size: None,
            window: VecDeque::new(),
            mappings: VecDeque::new(),
            tracks: Vec::new(),
            next_id: 1,
            frames_seen: 0,
            since_refresh: 0,
        })
    }

    pub fn params(&self) -> &TrackerParams {
        &self.params
    }

    /// All tracks ever started, in id order.
    pub fn tracks(&self) -> &[RoiTrack] {
        &self.tracks
    }

    pub fn active_tracks(&self) -> impl Iterator<Item = &RoiTrack> {
        self.tracks.iter().filter(|t| t.status == TrackStatus::Active)
    }

    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    /// Feeds the next frame. Frames before `K` only build ROI history; the
    /// ROIs of the first `K` frames become tracks, followed from frame `K`.
    pub fn process(&mut self, regions: RegionSet) -> Result<FrameOutput> {
        let dims = (regions.width, regions.height);
        match self.size {
            None => self.size = Some(dims),
            Some(s) if s != dims => {
                return Err(Error::FrameSizeMismatch { expected_w: s.0, expected_h: s.1, found_w: dims.0, found_h: dims.1 })
            }
            _ => {}
        }
        let k = self.params.k;
        if let Some(prev) = self.window.back() {
            self.mappings.push_back(map_regions(prev, &regions, self.params.delta)?);
            if self.mappings.len() > k - 1 {
                self.mappings.pop_front();
            }
        }
        let frame_index = regions.frame_index;
        self.window.push_back(regions);
        if self.window.len() > k {
            self.window.pop_front();
        }
        let t = self.frames_seen;
        self.frames_seen += 1;

        let mut out = FrameOutput { frame_index, ..FrameOutput::default() };
        if t + 1 < k {
            return Ok(out);
        }
        if t + 1 == k {
            self.spawn_unclaimed()?;
            return Ok(out);
        }
        out.search = self.step_tracks()?;
        out.occlusions = self.check_occlusions()?;
        self.since_refresh += 1;
        if self.since_refresh == k {
            self.refresh_rois()?;
        }
        out.records = self.records_at(frame_index);
        Ok(out)
    }

    fn current(&self) -> &RegionSet {
        self.window.back().expect("at least one frame seen")
    }

    fn width(&self) -> u32 {
        self.size.map_or(0, |s| s.0)
    }

    /// Re-runs ROI detection over the retained window: active tracks whose
    /// region no longer ends a moving lineage are lost, and unclaimed ROI
    /// regions start new tracks.
    pub fn refresh_rois(&mut self) -> Result<()> {
        self.since_refresh = 0;
        if self.mappings.is_empty() {
            return Ok(());
        }
        let ends = self.roi_ends()?;
        let frame_index = self.current().frame_index;
        for track in &mut self.tracks {
            if track.status == TrackStatus::Active && !track.region.is_some_and(|r| ends.contains_key(&r)) {
                if track.last().frame_index == frame_index {
                    track.history.pop();
                    track.directions.pop();
                }
                track.lose(frame_index);
            }
        }
        self.spawn_unclaimed()
    }

    /// ROI lineages ending in the newest frame: region id -> direction.
    fn roi_ends(&self) -> Result<BTreeMap<u32, Option<CardinalDirection>>> {
        let mappings: Vec<RegionMapping> = self.mappings.iter().cloned().collect();
        let frame_index = self.current().frame_index;
        Ok(detect_rois(&mappings, self.params.roi_threshold)?
            .into_iter()
            .filter(|c| c.is_roi && c.end_frame() == frame_index)
            .map(|c| (c.last_region(), c.direction))
            .collect())
    }

    fn spawn_unclaimed(&mut self) -> Result<()> {
        let ends = self.roi_ends()?;
        let curr = self.current();
        let width = self.width();
        let mut claimed: BTreeSet<u32> = self.active_tracks().filter_map(|t| t.region).collect();
        for t in self.tracks.iter().filter(|t| matches!(t.status, TrackStatus::Occluded { .. })) {
            for r in curr.closed() {
                if intersection_count(&r.pixels, &t.last().mask) > 0 {
                    claimed.insert(r.id);
                }
            }
        }
        let frame_index = curr.frame_index;
        let mut born = Vec::new();
        for (&region, &direction) in &ends {
            if claimed.contains(&region) {
                continue;
            }
            let mask = curr.region(region).expect("lineage ends on a closed region").pixels.clone();
            let mut track = RoiTrack::born(self.next_id + born.len() as u32, frame_index, mask, width, direction);
            track.region = Some(region);
            born.push(track);
        }
        self.next_id += born.len() as u32;
        self.tracks.extend(born);
        Ok(())
    }

    fn step_tracks(&mut self) -> Result<Vec<SearchStats>> {
        let curr = self.window.back().expect("frame");
        let mapping = self.mappings.back().expect("mapping once K frames are in");
        let active: Vec<usize> = (0..self.tracks.len())
            .filter(|&i| self.tracks[i].status == TrackStatus::Active)
            .collect();
        let anchors: Vec<Option<u32>> = active
            .iter()
            .map(|&i| self.tracks[i].region.and_then(|r| mapping.forward(r)).map(|p| p.curr))
            .collect();
        let graph = anchors.iter().any(Option::is_some).then(|| build_graph(curr));
        let params = self.params;

        let search = |(&i, &anchor): (&usize, &Option<u32>)| {
            search_track(&self.tracks[i], anchor, graph.as_ref(), curr, &params)
        };
        let outcomes: Vec<Outcome> = if params.parallel {
            active.par_iter().zip(anchors.par_iter()).map(search).collect()
        } else {
            active.iter().zip(anchors.iter()).map(search).collect()
        };

        // a region claimed twice goes to the larger overlap (lower id on ties)
        let mut winner: BTreeMap<u32, (usize, u32)> = BTreeMap::new();
        for (&i, o) in active.iter().zip(&outcomes) {
            if let Some((region, overlap)) = o.best {
                let id = self.tracks[i].id;
                let e = winner.entry(region).or_insert((overlap, id));
                if overlap > e.0 || (overlap == e.0 && id < e.1) {
                    *e = (overlap, id);
                }
            }
        }

        let frame_index = curr.frame_index;
        let width = self.width();
        let stats: Vec<SearchStats> = outcomes.iter().filter_map(|o| o.stats).collect();
        let mut updates = Vec::new();
        for (&i, o) in active.iter().zip(&outcomes) {
            let id = self.tracks[i].id;
            updates.push(match o.best {
                None => (i, None, TrackStatus::Lost),
                Some((region, _)) if winner[&region].1 == id => (i, Some(region), TrackStatus::Active),
                Some((region, _)) => (i, None, TrackStatus::Occluded { by: winner[&region].1 }),
            });
        }
        for (i, region, status) in updates {
            let track = &mut self.tracks[i];
            match status {
                TrackStatus::Lost => track.lose(frame_index),
                TrackStatus::Active => {
                    let r = region.expect("winner has a region");
                    let mask = curr.region(r).expect("closed region").pixels.clone();
                    track.push_frame(frame_index, mask, width, TrackStatus::Active);
                    track.region = Some(r);
                }
                TrackStatus::Occluded { .. } => {
                    let frozen = track.last().mask.clone();
                    track.push_frame(frame_index, frozen, width, status);
                    track.region = None;
                    track.occluded_for = 1;
                }
            }
        }
        self.step_occluded(frame_index);
        Ok(stats)
    }

    /// Occluded tracks keep their frozen mask until it separates from the
    /// occluder, or are dropped after `K` frames.
    fn step_occluded(&mut self, frame_index: usize) {
        let width = self.width();
        let k = self.params.k;
        for i in 0..self.tracks.len() {
            let TrackStatus::Occluded { by } = self.tracks[i].status else { continue };
            if self.tracks[i].last().frame_index == frame_index {
                continue;
            }
            let occluder = self.tracks.iter().find(|t| t.id == by).expect("occluder exists");
            let apart = occluder.status == TrackStatus::Lost
                || mask_gap(&self.tracks[i].last().mask, &occluder.last().mask, width) > 0.0;
            let track = &mut self.tracks[i];
            if apart {
                let frozen = track.last().mask.clone();
                track.push_frame(frame_index, frozen, width, TrackStatus::Active);
                track.occluded_for = 0;
            } else if track.occluded_for >= k {
                track.lose(frame_index);
            } else {
                let frozen = track.last().mask.clone();
                track.push_frame(frame_index, frozen, width, TrackStatus::Occluded { by });
                track.occluded_for += 1;
            }
        }
    }

    fn check_occlusions(&mut self) -> Result<Vec<OcclusionReport>> {
        let width = self.width();
        let frame_index = self.current().frame_index;
        let mut reports = Vec::new();
        let ids: Vec<usize> = (0..self.tracks.len())
            .filter(|&i| {
                let t = &self.tracks[i];
                t.status == TrackStatus::Active && t.history.len() >= 2 && t.last().frame_index == frame_index
            })
            .collect();
        for (n, &i) in ids.iter().enumerate() {
            for &j in &ids[n + 1..] {
                if self.tracks[i].status != TrackStatus::Active || self.tracks[j].status != TrackStatus::Active {
                    continue;
                }
                let report = detect_occlusion(&self.tracks[i], &self.tracks[j], self.params.iota, width)?;
                if report.flagged {
                    let occludee = if self.tracks[i].id == report.occludee { i } else { j };
                    let track = &mut self.tracks[occludee];
                    let status = TrackStatus::Occluded { by: report.occluder };
                    track.status = status;
                    track.history.last_mut().expect("frame").status = status;
                    track.region = None;
                    track.occluded_for = 1;
                }
                reports.push(report);
            }
        }
        Ok(reports)
    }

    fn records_at(&self, frame_index: usize) -> Vec<TrackRecord> {
        let mut out = Vec::new();
        for t in &self.tracks {
            if let Some(f) = t.frame(frame_index) {
                out.push(TrackRecord { frame_index, track_id: t.id, status: f.status, bbox: f.bbox });
            } else if t.lost_at == Some(frame_index) {
                out.push(TrackRecord { frame_index, track_id: t.id, status: TrackStatus::Lost, bbox: t.last().bbox });
            }
        }
        out
    }
}

fn search_track(
    track: &RoiTrack,
    anchor: Option<u32>,
    graph: Option<&RegionGraph>,
    curr: &RegionSet,
    params: &TrackerParams,
) -> Outcome {
    let last = &track.last().mask;
    let mut examined = BTreeSet::new();
    let mut best: Option<(u32, usize)> = None;
    let mut consider = |ids: &mut dyn Iterator<Item = u32>, examined: &mut BTreeSet<u32>| {
        for id in ids {
            if !examined.insert(id) {
                continue;
            }
            let Some(r) = curr.region(id) else { continue };
            let o = intersection_count(last, &r.pixels);
            // ties go to the lower id; ids arrive in arbitrary order
            if best.is_none_or(|(bid, bo)| o > bo || (o == bo && id < bid)) {
                best = Some((id, o));
            }
        }
        best
    };
    // an overlap above half the mask cannot be matched by any disjoint region
    let certain = |b: Option<(u32, usize)>| b.is_some_and(|(_, o)| 2 * o > last.len());

    let mut stats = None;
    let mut tier = SearchTier::Frame;
    if let (Some(a), Some(g)) = (anchor, graph) {
        let table = node_table(g, a).expect("anchor is a closed region of this frame");
        let wg = assign_weights(g, &table);
        let full = candidate_regions(&wg, a, None);
        let pruned = candidate_regions(&wg, a, track.direction());
        let first: &BTreeSet<u32> = if params.optimize { &pruned } else { &full };
        let mut b = consider(&mut std::iter::once(a).chain(first.iter().copied()), &mut examined);
        tier = SearchTier::Pruned;
        if !certain(b) && params.optimize {
            b = consider(&mut full.iter().copied(), &mut examined);
            tier = SearchTier::Neighbours;
        }
        if !certain(b) {
            tier = SearchTier::Frame;
        }
        stats = Some((pruned.len(), full.len()));
    }
    if tier == SearchTier::Frame {
        consider(&mut curr.closed().map(|r| r.id), &mut examined);
    }
    let stats = stats.map(|(pruned, full)| SearchStats {
        frame_index: curr.frame_index,
        track_id: track.id,
        pruned,
        full,
        examined: examined.len(),
        tier,
    });
    Outcome { best: best.filter(|&(_, o)| o > 0), stats }
}

/// Feeds the first `K + 1` frames. The returned tracker holds one active
/// track per ROI of the first `K` frames.
pub fn init_tracker(frames: &[RegionSet], params: TrackerParams) -> Result<(Tracker, Vec<FrameOutput>)> {
    if frames.len() < params.k + 1 {
        return Err(Error::InsufficientHistory { needed: params.k + 1, have: frames.len() });
    }
    let mut tracker = Tracker::new(params)?;
    let outputs = frames[..params.k + 1]
        .iter()
        .map(|f| tracker.process(f.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok((tracker, outputs))
}

/// Everything a tracking run produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackingRun {
    pub records: Vec<TrackRecord>,
    pub occlusions: Vec<OcclusionReport>,
    pub search: Vec<SearchStats>,
    pub tracks: Vec<RoiTrack>,
}

pub fn track_sequence(frames: impl IntoIterator<Item = RegionSet>, params: TrackerParams) -> Result<TrackingRun> {
    let mut tracker = Tracker::new(params)?;
    let mut run = TrackingRun::default();
    for f in frames {
        let out = tracker.process(f)?;
        run.records.extend(out.records);
        run.occlusions.extend(out.occlusions);
        run.search.extend(out.search);
    }
    run.tracks = tracker.tracks;
    Ok(run)
}

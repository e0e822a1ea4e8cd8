//! Region-based depth denoising.
//!
//! Low-magnitude sensor noise is removed with a hole-aware Gaussian filter.
//! The filtered frame is then cut into watershed regions; enclosed regions
//! are merged into their container so whole objects survive as one region,
//! and every closed region whose area does not exceed the mean closed-region
//! area is discarded. High-magnitude noise (object-boundary speckle and
//! holes) produces many small regions, so it falls below that mean.

mod regions;
mod smooth;
mod suppress;
mod watershed;

pub use regions::{categorize_regions, merge_enclosed};
pub use smooth::{gaussian_kernel, gaussian_smooth};
pub use suppress::suppress_noise;
pub use watershed::{gradient_magnitude, watershed_segment, watershed_segment_with, WatershedParams};

use crate::depth_io::DepthMap;
use crate::error::Result;
use crate::geometry::{centroid, BBox};

pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_BORDER_POINTS: usize = 20;

/// Row-major region ids; 0 marks an unassigned pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionLabelMap {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
}

impl RegionLabelMap {
    pub fn new(width: u32, height: u32, labels: Vec<u32>) -> Self {
        assert_eq!(labels.len(), width as usize * height as usize, "label map size");
        RegionLabelMap { width, height, labels }
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    pub fn distinct_labels(&self) -> usize {
        let mut seen = vec![false; self.max_label() as usize + 1];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        seen.iter().skip(1).filter(|&&s| s).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionCategory {
    /// Touches the frame border with at least `P` pixels.
    Background,
    /// Whose whole outer boundary abuts one other closed region.
    Enclosed { by: u32 },
    /// Contains at least one enclosed region.
    Enclosing,
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: u32,
    /// Sorted row-major pixel indices.
    pub pixels: Vec<u32>,
    /// Pixels with an 8-neighbour outside the region or outside the frame.
    pub boundary: Vec<u32>,
    pub category: RegionCategory,
    pub bbox: BBox,
    pub centroid: (f64, f64),
}

impl Region {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_closed(&self) -> bool {
        self.category != RegionCategory::Background
    }

    pub(crate) fn from_pixels(id: u32, pixels: Vec<u32>, labels: &[u32], width: u32, height: u32) -> Self {
        let boundary = boundary_pixels(&pixels, id, labels, width, height);
        let bbox = BBox::from_pixels(&pixels, width).expect("region is non-empty");
        let centroid = centroid(&pixels, width).expect("region is non-empty");
        Region { id, pixels, boundary, category: RegionCategory::Independent, bbox, centroid }
    }
}

pub(crate) fn boundary_pixels(pixels: &[u32], id: u32, labels: &[u32], width: u32, height: u32) -> Vec<u32> {
    let (w, h) = (i64::from(width), i64::from(height));
    pixels
        .iter()
        .copied()
        .filter(|&p| {
            let (x, y) = (i64::from(p % width), i64::from(p / width));
            (-1..=1).any(|dy| {
                (-1..=1).any(|dx| {
                    let (nx, ny) = (x + dx, y + dy);
                    nx < 0 || ny < 0 || nx >= w || ny >= h || labels[(ny * w + nx) as usize] != id
                })
            })
        })
        .collect()
}

/// A frame partitioned into categorised regions.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    pub frame_index: usize,
    pub width: u32,
    pub height: u32,
    /// Per-pixel region id, 0 where no region remains.
    pub labels: Vec<u32>,
    /// Sorted by id.
    pub regions: Vec<Region>,
    /// Area threshold applied by noise suppression, if any.
    pub tau: Option<f64>,
}

impl RegionSet {
    /// Builds regions straight from a label map; every nonzero label becomes
    /// an `Independent` region. Handy for hand-made fixtures.
    pub fn from_label_map(map: &RegionLabelMap, frame_index: usize) -> Self {
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); map.max_label() as usize + 1];
        for (p, &l) in map.labels.iter().enumerate() {
            if l != 0 {
                buckets[l as usize].push(p as u32);
            }
        }
        let regions = buckets
            .into_iter()
            .enumerate()
            .filter(|(_, px)| !px.is_empty())
            .map(|(id, px)| Region::from_pixels(id as u32, px, &map.labels, map.width, map.height))
            .collect();
        RegionSet {
            frame_index,
            width: map.width,
            height: map.height,
            labels: map.labels.clone(),
            regions,
            tau: None,
        }
    }

    pub fn region(&self, id: u32) -> Option<&Region> {
        self.regions
            .binary_search_by_key(&id, |r| r.id)
            .ok()
            .map(|i| &self.regions[i])
    }

    pub fn closed(&self) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(|r| r.is_closed())
    }

    pub fn closed_count(&self) -> usize {
        self.closed().count()
    }

    /// Indexed by label: true where the label is a closed region.
    pub fn closed_lookup(&self) -> Vec<bool> {
        let max = self.regions.last().map_or(0, |r| r.id);
        let mut out = vec![false; max as usize + 1];
        for r in self.closed() {
            out[r.id as usize] = true;
        }
        out
    }

    pub fn total_area(&self) -> usize {
        self.regions.iter().map(Region::area).sum()
    }

    pub fn label_map(&self) -> RegionLabelMap {
        RegionLabelMap::new(self.width, self.height, self.labels.clone())
    }
}

/// Parameters of the denoising chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub sigma: f64,
    /// Border-pixel count at which a region counts as background.
    pub border_points: usize,
    pub watershed: WatershedParams,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            sigma: DEFAULT_SIGMA,
            border_points: DEFAULT_BORDER_POINTS,
            watershed: WatershedParams::default(),
        }
    }
}

/// Smooth, segment, categorise, merge and suppress one frame.
pub fn denoise(frame: &DepthMap, params: &NoiseParams) -> Result<RegionSet> {
    let smoothed = gaussian_smooth(frame, params.sigma)?;
    let labels = watershed_segment_with(&smoothed, &params.watershed);
    let categorized = categorize_regions(&labels, params.border_points, frame.frame_index());
    Ok(suppress_noise(&merge_enclosed(&categorized)))
}

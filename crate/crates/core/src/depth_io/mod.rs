//! Depth-frame ingestion, ground truth, synthetic scenes and overlay output.

mod codec;
mod ground_truth;
mod manifest;
mod overlay;
mod synth;

pub use codec::{encode_pgm, load_depth_frame, save_depth_frame};
pub use ground_truth::{GroundTruth, GtRecord};
pub use manifest::{load_sequence, write_manifest, Sequence};
pub use overlay::{encode_png, render_masks, render_overlay, track_color, write_overlay};
pub use synth::{
    synthesize_scene, Actor, BlobInfo, NoiseRecipe, SceneSpec, Shape, SyntheticFrame,
    SyntheticScene, BACKGROUND_DEPTH_MM,
};

use crate::error::{Error, Result};

/// Single-channel depth frame in millimetres; 0 marks a hole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<u16>,
    frame_index: usize,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, values: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "depth map must be non-empty, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize;
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: values.len() });
        }
        Ok(DepthMap { width, height, values, frame_index: 0 })
    }

    pub fn filled(width: u32, height: u32, value: u16) -> Result<Self> {
        DepthMap::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn with_frame_index(mut self, frame_index: usize) -> Self {
        self.frame_index = frame_index;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [u16] {
        &mut self.values
    }

    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.values[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: u16) {
        self.values[(y * self.width + x) as usize] = v;
    }

    pub fn hole_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0).count()
    }
}

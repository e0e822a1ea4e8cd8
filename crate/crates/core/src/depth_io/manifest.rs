use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{load_depth_frame, DepthMap, GroundTruth};
use crate::error::{Error, Result};

/// A loaded depth sequence: frames in manifest order, indices `0..n`.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<DepthMap>,
    pub ground_truth: Option<GroundTruth>,
}

impl Sequence {
    pub fn frame_size(&self) -> (u32, u32) {
        self.frames
            .first()
            .map(|f| (f.width(), f.height()))
            .unwrap_or((0, 0))
    }
}

struct Manifest {
    frames: Vec<PathBuf>,
    gt: Option<PathBuf>,
}

fn parse_manifest(text: &str, base: &Path) -> Manifest {
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut frames = Vec::new();
    let mut gt = None;
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if frames.is_empty() && gt.is_none() {
            if let Some(rest) = line.strip_prefix("gt:") {
                gt = Some(resolve(rest.trim()));
                continue;
            }
        }
        frames.push(resolve(line));
    }
    Manifest { frames, gt }
}

/// Loads every frame listed in a manifest. Relative paths resolve against
/// the manifest's directory.
pub fn load_sequence(manifest: impl AsRef<Path>) -> Result<Sequence> {
    let manifest = manifest.as_ref();
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let parsed = parse_manifest(&text, base);
    if parsed.frames.is_empty() {
        return Err(Error::EmptyManifest(manifest.to_path_buf()));
    }

    let mut frames = Vec::with_capacity(parsed.frames.len());
    for (index, path) in parsed.frames.iter().enumerate() {
        if !path.exists() {
            return Err(Error::MissingFrame(path.clone()));
        }
        let frame = load_depth_frame(path)?.with_frame_index(index);
        if let Some(first) = frames.first() {
            let first: &DepthMap = first;
            if (first.width(), first.height()) != (frame.width(), frame.height()) {
                return Err(Error::InconsistentDimensions {
                    index,
                    expected_w: first.width(),
                    expected_h: first.height(),
                    found_w: frame.width(),
                    found_h: frame.height(),
                });
            }
        }
        frames.push(frame);
    }

    let ground_truth = match &parsed.gt {
        Some(p) => Some(GroundTruth::load(p)?),
        None => None,
    };
    let name = manifest
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence")
        .to_string();
    Ok(Sequence { name, frames, ground_truth })
}

/// Manifest text for frame files (and optional ground truth) relative to the
/// manifest's own directory.
pub fn write_manifest(frame_names: &[String], gt_name: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(gt) = gt_name {
        let _ = writeln!(out, "gt: {gt}");
    }
    for f in frame_names {
        let _ = writeln!(out, "{f}");
    }
    out
}

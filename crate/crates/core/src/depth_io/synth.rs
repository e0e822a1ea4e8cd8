//! Deterministic synthetic depth scenes with exact ground truth.
//!
//! Actors are rigid rectangles or discs rendered over a far background with a
//! z-buffer (nearer depth wins). Noise comes in the three flavours seen in
//! real sensors: low-magnitude Gaussian sensor noise, small high-magnitude
//! blobs, and zero-valued holes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DepthMap, GroundTruth, GtRecord};
use crate::error::{Error, Result};
use crate::geometry::BBox;

pub const BACKGROUND_DEPTH_MM: u16 = 8000;

const BLOB_MARGIN: i64 = 4;
const BLOB_ATTEMPTS: usize = 64;
const BLOB_DEPTH_MM: (u16, u16) = (500, 7000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Rect { width: u32, height: u32 },
    Disc { diameter: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub shape: Shape,
    /// Top-left corner of the bounding box at frame 0.
    pub x: i64,
    pub y: i64,
    /// Pixels per frame, `[dx, dy]`.
    #[serde(default)]
    pub velocity: [i64; 2],
    pub depth: u16,
    /// Per-frame growth of each side (a disc's radius grows by this much).
    #[serde(default)]
    pub growth: i64,
    /// Inclusive frame range in which the actor exists.
    #[serde(default)]
    pub visible: Option<[usize; 2]>,
}

impl Actor {
    pub fn rect(x: i64, y: i64, width: u32, height: u32, depth: u16) -> Self {
        Actor {
            shape: Shape::Rect { width, height },
            x,
            y,
            velocity: [0, 0],
            depth,
            growth: 0,
            visible: None,
        }
    }

    pub fn disc(x: i64, y: i64, diameter: u32, depth: u16) -> Self {
        Actor { shape: Shape::Disc { diameter }, ..Actor::rect(x, y, 1, 1, depth) }
    }

    pub fn moving(mut self, dx: i64, dy: i64) -> Self {
        self.velocity = [dx, dy];
        self
    }

    pub fn growing(mut self, growth: i64) -> Self {
        self.growth = growth;
        self
    }

    pub fn visible_between(mut self, first: usize, last: usize) -> Self {
        self.visible = Some([first, last]);
        self
    }

    pub fn is_visible(&self, t: usize) -> bool {
        self.visible.is_none_or(|[a, b]| a <= t && t <= b)
    }

    /// Bounding box `(x, y, w, h)` at frame `t`, possibly outside the frame.
    fn extent(&self, t: usize) -> (i64, i64, i64, i64) {
        let t = t as i64;
        let g = self.growth * t;
        let (w, h) = match self.shape {
            Shape::Rect { width, height } => (i64::from(width), i64::from(height)),
            Shape::Disc { diameter } => (i64::from(diameter), i64::from(diameter)),
        };
        (
            self.x + self.velocity[0] * t - g,
            self.y + self.velocity[1] * t - g,
            w + 2 * g,
            h + 2 * g,
        )
    }

    fn contains(&self, t: usize, px: i64, py: i64) -> bool {
        let (x, y, w, h) = self.extent(t);
        if px < x || py < y || px >= x + w || py >= y + h {
            return false;
        }
        match self.shape {
            Shape::Rect { .. } => true,
            Shape::Disc { .. } => {
                // doubled coordinates keep even diameters exact
                let dx = 2 * (px - x) - (w - 1);
                let dy = 2 * (py - y) - (h - 1);
                dx * dx + dy * dy <= w * w
            }
        }
    }

    /// Shape pixels at frame `t` (row-major indices), ignoring occlusion.
    pub fn pixels(&self, t: usize, width: u32, height: u32) -> Vec<u32> {
        let (x, y, w, h) = self.extent(t);
        let mut out = Vec::new();
        for py in y.max(0)..(y + h).min(i64::from(height)) {
            for px in x.max(0)..(x + w).min(i64::from(width)) {
                if self.contains(t, px, py) {
                    out.push((py * i64::from(width) + px) as u32);
                }
            }
        }
        out
    }

    fn min_area(&self, frames: usize) -> u64 {
        (0..frames)
            .filter(|&t| self.is_visible(t))
            .map(|t| {
                let (x, y, w, h) = self.extent(t);
                if w <= 0 || h <= 0 {
                    return 0;
                }
                let mut n = 0u64;
                for py in y..y + h {
                    for px in x..x + w {
                        n += u64::from(self.contains(t, px, py));
                    }
                }
                n
            })
            .min()
            .unwrap_or(u64::MAX)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecipe {
    #[serde(default)]
    pub sensor_stddev: f64,
    #[serde(default)]
    pub blob_count: usize,
    /// Inclusive pixel-area range of high-magnitude noise blobs.
    #[serde(default = "default_blob_area")]
    pub blob_area: [u64; 2],
    #[serde(default)]
    pub hole_probability: f64,
    /// Place blobs once, clear of every actor in every frame, instead of
    /// redrawing them per frame.
    #[serde(default)]
    pub static_blobs: bool,
}

fn default_blob_area() -> [u64; 2] {
    [100, 3000]
}

impl Default for NoiseRecipe {
    fn default() -> Self {
        NoiseRecipe {
            sensor_stddev: 0.0,
            blob_count: 0,
            blob_area: default_blob_area(),
            hole_probability: 0.0,
            static_blobs: false,
        }
    }
}

fn default_width() -> u32 {
    320
}

fn default_height() -> u32 {
    240
}

fn default_background() -> u16 {
    BACKGROUND_DEPTH_MM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub frames: usize,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
    #[serde(default = "default_background")]
    pub background: u16,
    #[serde(default)]
    pub actors: Vec<Actor>,
    #[serde(default)]
    pub noise: NoiseRecipe,
}

impl SceneSpec {
    pub fn new(frames: usize, width: u32, height: u32) -> Self {
        SceneSpec {
            frames,
            width,
            height,
            background: BACKGROUND_DEPTH_MM,
            actors: Vec::new(),
            noise: NoiseRecipe::default(),
        }
    }

    pub fn with_actor(mut self, actor: Actor) -> Self {
        self.actors.push(actor);
        self
    }

    pub fn with_noise(mut self, noise: NoiseRecipe) -> Self {
        self.noise = noise;
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format("scene spec", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScene(m));
        if self.frames == 0 || self.width == 0 || self.height == 0 {
            return bad("frame count and frame size must be positive".into());
        }
        if self.background == 0 {
            return bad("background depth must be nonzero".into());
        }
        for (i, a) in self.actors.iter().enumerate() {
            if a.depth == 0 {
                return bad(format!("actor {i} has zero depth"));
            }
            if let Some([first, last]) = a.visible {
                if first > last || last >= self.frames {
                    return bad(format!("actor {i} visibility window {first}..={last} invalid"));
                }
            }
            for t in (0..self.frames).filter(|&t| a.is_visible(t)) {
                let (x, y, w, h) = a.extent(t);
                if w <= 0 || h <= 0 {
                    return bad(format!("actor {i} is degenerate (zero area) at frame {t}"));
                }
                if x < 0 || y < 0 || x + w > i64::from(self.width) || y + h > i64::from(self.height) {
                    return bad(format!("actor {i} leaves the frame at frame {t}"));
                }
            }
        }
        let n = &self.noise;
        if !(n.sensor_stddev >= 0.0 && n.sensor_stddev.is_finite()) {
            return bad("sensor noise stddev must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&n.hole_probability) {
            return bad("hole probability must lie in [0, 1]".into());
        }
        if n.blob_count > 0 {
            let [lo, hi] = n.blob_area;
            if lo == 0 || lo > hi {
                return bad(format!("blob area range {lo}..={hi} invalid"));
            }
            let smallest = self
                .actors
                .iter()
                .map(|a| a.min_area(self.frames))
                .min()
                .unwrap_or(u64::MAX);
            if hi >= smallest {
                return bad(format!(
                    "noise blobs up to {hi} px are not smaller than the smallest actor ({smallest} px)"
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlobInfo {
    pub bbox: BBox,
    pub depth: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticFrame {
    pub depth: DepthMap,
    /// Per pixel: 0 for background, `i + 1` where actor `i` is visible.
    pub actor_ids: Vec<u16>,
    pub blobs: Vec<BlobInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticScene {
    pub frames: Vec<SyntheticFrame>,
    /// Object ids are actor index + 1.
    pub ground_truth: GroundTruth,
}

impl SyntheticScene {
    pub fn depth_frames(&self) -> Vec<DepthMap> {
        self.frames.iter().map(|f| f.depth.clone()).collect()
    }
}

pub fn synthesize_scene(spec: &SceneSpec, seed: u64) -> Result<SyntheticScene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (spec.width, spec.height);
    let npix = w as usize * h as usize;
    let sensor = (spec.noise.sensor_stddev > 0.0)
        .then(|| Normal::new(0.0, spec.noise.sensor_stddev).expect("validated stddev"));

    let fixed_blobs = spec.noise.static_blobs.then(|| {
        let mut swept = vec![0u16; npix];
        for t in 0..spec.frames {
            for (i, actor) in spec.actors.iter().enumerate().filter(|(_, a)| a.is_visible(t)) {
                for p in actor.pixels(t, w, h) {
                    swept[p as usize] = i as u16 + 1;
                }
            }
        }
        place_blobs(spec, &swept, &mut rng)
    });

    let mut frames = Vec::with_capacity(spec.frames);
    let mut gt = Vec::new();
    for t in 0..spec.frames {
        let mut depth = vec![spec.background; npix];
        let mut ids = vec![0u16; npix];
        for (i, actor) in spec.actors.iter().enumerate() {
            if !actor.is_visible(t) {
                continue;
            }
            for p in actor.pixels(t, w, h) {
                let p = p as usize;
                if ids[p] == 0 || actor.depth < depth[p] {
                    depth[p] = actor.depth;
                    ids[p] = i as u16 + 1;
                }
            }
        }
        for i in 0..spec.actors.len() {
            let visible: Vec<u32> = ids
                .iter()
                .enumerate()
                .filter(|&(_, &id)| usize::from(id) == i + 1)
                .map(|(p, _)| p as u32)
                .collect();
            if let Some(bbox) = BBox::from_pixels(&visible, w) {
                gt.push(GtRecord { frame_index: t, object_id: i as u32 + 1, bbox });
            }
        }

        let blobs = match &fixed_blobs {
            Some(b) => b.clone(),
            None => place_blobs(spec, &ids, &mut rng),
        };
        for b in &blobs {
            for y in b.bbox.y..b.bbox.bottom() {
                for x in b.bbox.x..b.bbox.right() {
                    depth[(y * w + x) as usize] = b.depth;
                }
            }
        }
        if let Some(normal) = &sensor {
            for v in depth.iter_mut() {
                let noisy = f64::from(*v) + normal.sample(&mut rng);
                *v = noisy.round().clamp(1.0, 65535.0) as u16;
            }
        }
        if spec.noise.hole_probability > 0.0 {
            for v in depth.iter_mut() {
                if rng.random_bool(spec.noise.hole_probability) {
                    *v = 0;
                }
            }
        }
        let map = DepthMap::new(w, h, depth)?.with_frame_index(t);
        frames.push(SyntheticFrame { depth: map, actor_ids: ids, blobs });
    }
    Ok(SyntheticScene { frames, ground_truth: GroundTruth::new(gt) })
}

fn place_blobs(spec: &SceneSpec, ids: &[u16], rng: &mut ChaCha8Rng) -> Vec<BlobInfo> {
    let (w, h) = (i64::from(spec.width), i64::from(spec.height));
    let [lo, hi] = spec.noise.blob_area;
    let mut placed: Vec<BlobInfo> = Vec::new();
    for _ in 0..spec.noise.blob_count {
        let area = rng.random_range(lo..=hi);
        let aspect: f64 = rng.random_range(0.5..2.0);
        let bw = ((area as f64 * aspect).sqrt().round() as i64).clamp(1, area as i64);
        let bh = (area as i64 / bw).max(1);
        let depth = rng.random_range(BLOB_DEPTH_MM.0..=BLOB_DEPTH_MM.1);
        if bw + 2 * BLOB_MARGIN > w || bh + 2 * BLOB_MARGIN > h {
            continue;
        }
        for _ in 0..BLOB_ATTEMPTS {
            let x = rng.random_range(BLOB_MARGIN..=w - bw - BLOB_MARGIN);
            let y = rng.random_range(BLOB_MARGIN..=h - bh - BLOB_MARGIN);
            let (ex0, ey0) = (x - BLOB_MARGIN, y - BLOB_MARGIN);
            let (ex1, ey1) = (x + bw + BLOB_MARGIN, y + bh + BLOB_MARGIN);
            let hits_blob = placed.iter().any(|b| {
                let b = b.bbox;
                ex0 < i64::from(b.right()) + BLOB_MARGIN
                    && i64::from(b.x) - BLOB_MARGIN < ex1
                    && ey0 < i64::from(b.bottom()) + BLOB_MARGIN
                    && i64::from(b.y) - BLOB_MARGIN < ey1
            });
            if hits_blob {
                continue;
            }
            let hits_actor = (ey0.max(0)..ey1.min(h))
                .any(|py| (ex0.max(0)..ex1.min(w)).any(|px| ids[(py * w + px) as usize] != 0));
            if hits_actor {
                continue;
            }
            placed.push(BlobInfo {
                bbox: BBox::new(x as u32, y as u32, bw as u32, bh as u32),
                depth,
            });
            break;
        }
    }
    placed
}

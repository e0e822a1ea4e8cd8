//! End-to-end runs behind the `rgtrack` subcommands.
//!
//! Every report is plain text: a `# key=value` header echoing the
//! configuration, then tab-separated `metric  sequence  value` rows. Files are
//! written through a temp-then-rename so a failed run leaves no partial
//! report behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::depth_io::{
    encode_pgm, encode_png, load_sequence, render_masks, synthesize_scene, write_manifest, DepthMap, GroundTruth,
    SceneSpec, Sequence,
};
use crate::error::{Error, Result};
use crate::eval::{match_detections, f1_score, sr_curve_since, success_rate_since, threshold_grid, DetectionCounts, Scores, SrCurve, DEFAULT_R_MIN};
use crate::fsutil::write_atomic;
use crate::geometry::BBox;
use crate::noise_filter::{denoise, NoiseParams, RegionSet, DEFAULT_BORDER_POINTS, DEFAULT_SIGMA};
use crate::roi_detect::{detect_rois, map_regions, RegionMapping, DEFAULT_DELTA, DEFAULT_K, DEFAULT_ROI_THRESHOLD};
use crate::tracker::{records_to_text, track_sequence, TrackStatus, Tracker, TrackerParams, TrackingRun, DEFAULT_IOTA};

/// Step of the threshold grid written to `sr_curve.tsv`.
pub const SR_CURVE_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sigma: f64,
    pub border_points: usize,
    pub k: usize,
    pub delta: usize,
    pub roi_threshold: usize,
    pub iota: f64,
    pub r_min: f64,
    pub optimize: bool,
    pub manifest: PathBuf,
    /// Overrides the ground truth named in the manifest.
    pub gt: Option<PathBuf>,
    pub out: PathBuf,
    pub overlays: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sigma: DEFAULT_SIGMA,
            border_points: DEFAULT_BORDER_POINTS,
            k: DEFAULT_K,
            delta: DEFAULT_DELTA,
            roi_threshold: DEFAULT_ROI_THRESHOLD,
            iota: DEFAULT_IOTA,
            r_min: DEFAULT_R_MIN,
            optimize: true,
            manifest: PathBuf::from("manifest.txt"),
            gt: None,
            out: PathBuf::from("out"),
            overlays: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.border_points == 0 {
            return Err(Error::InvalidParameter("border points must be positive".into()));
        }
        if !(self.r_min > 0.0 && self.r_min < 1.0) {
            return Err(Error::InvalidParameter(format!("r_min must lie in (0, 1), got {}", self.r_min)));
        }
        self.tracker_params(false).validate()
    }

    pub fn noise_params(&self) -> NoiseParams {
        NoiseParams { sigma: self.sigma, border_points: self.border_points, ..NoiseParams::default() }
    }

    pub fn tracker_params(&self, parallel: bool) -> TrackerParams {
        TrackerParams {
            k: self.k,
            delta: self.delta,
            roi_threshold: self.roi_threshold,
            iota: self.iota,
            optimize: self.optimize,
            parallel,
        }
    }

    /// `# key=value` lines, starting with the command name.
    pub fn to_header(&self, command: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command={command}");
        let _ = writeln!(s, "# sigma={}", self.sigma);
        let _ = writeln!(s, "# border_points={}", self.border_points);
        let _ = writeln!(s, "# k={}", self.k);
        let _ = writeln!(s, "# delta={}", self.delta);
        let _ = writeln!(s, "# roi_threshold={}", self.roi_threshold);
        let _ = writeln!(s, "# iota={}", self.iota);
        let _ = writeln!(s, "# r_min={}", self.r_min);
        let _ = writeln!(s, "# optimize={}", self.optimize);
        let _ = writeln!(s, "# overlays={}", self.overlays);
        let _ = writeln!(s, "# manifest={}", self.manifest.display());
        let _ = writeln!(s, "# gt={}", self.gt.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        let _ = writeln!(s, "# out={}", self.out.display());
        s
    }

    /// Reads back a header written by [`PipelineConfig::to_header`]. Returns
    /// the command name with the configuration.
    pub fn from_header(text: &str) -> Result<(String, Self)> {
        let mut cfg = PipelineConfig::default();
        let mut command = None;
        for line in text.lines() {
            let Some(body) = line.strip_prefix("# ") else { continue };
            let Some((key, value)) = body.split_once('=') else { continue };
            let bad = |e: &dyn std::fmt::Display| Error::format("report header", format!("field {key}: {e}"));
            match key {
                "command" => command = Some(value.to_string()),
                "sigma" => cfg.sigma = value.parse().map_err(|e| bad(&e))?,
                "border_points" => cfg.border_points = value.parse().map_err(|e| bad(&e))?,
                "k" => cfg.k = value.parse().map_err(|e| bad(&e))?,
                "delta" => cfg.delta = value.parse().map_err(|e| bad(&e))?,
                "roi_threshold" => cfg.roi_threshold = value.parse().map_err(|e| bad(&e))?,
                "iota" => cfg.iota = value.parse().map_err(|e| bad(&e))?,
                "r_min" => cfg.r_min = value.parse().map_err(|e| bad(&e))?,
                "optimize" => cfg.optimize = value.parse().map_err(|e| bad(&e))?,
                "overlays" => cfg.overlays = value.parse().map_err(|e| bad(&e))?,
                "manifest" => cfg.manifest = PathBuf::from(value),
                "gt" => cfg.gt = (!value.is_empty()).then(|| PathBuf::from(value)),
                "out" => cfg.out = PathBuf::from(value),
                _ => {}
            }
        }
        let command = command.ok_or_else(|| Error::format("report header", "no command line"))?;
        Ok((command, cfg))
    }
}

struct Report {
    sequence: String,
    text: String,
}

impl Report {
    fn new(config: &PipelineConfig, command: &str, sequence: &str) -> Self {
        let mut text = config.to_header(command);
        text.push_str("metric\tsequence\tvalue\n");
        Report { sequence: sequence.to_string(), text }
    }

    fn row(&mut self, metric: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{metric}\t{}\t{value}", self.sequence);
    }
}

fn load_input(config: &PipelineConfig) -> Result<(Sequence, Option<GroundTruth>)> {
    config.validate()?;
    let seq = load_sequence(&config.manifest)?;
    let gt = match &config.gt {
        Some(p) => Some(GroundTruth::load(p)?),
        None => seq.ground_truth.clone(),
    };
    if let Some(gt) = &gt {
        let (w, h) = seq.frame_size();
        gt.check_bounds(w, h)?;
    }
    Ok((seq, gt))
}

fn prepare_out(config: &PipelineConfig) -> Result<()> {
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    if config.overlays {
        let dir = config.out.join("overlays");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    Ok(())
}

fn overlay_path(out: &Path, frame_index: usize) -> PathBuf {
    out.join("overlays").join(format!("{frame_index:06}.png"))
}

/// Denoises every frame; frames are independent so this runs on the rayon pool.
pub fn denoise_sequence(frames: &[DepthMap], params: &NoiseParams) -> Result<Vec<RegionSet>> {
    frames.par_iter().map(|f| denoise(f, params)).collect()
}

/// Maps each consecutive frame pair; entry `i` maps frame `i` to `i + 1`.
pub fn map_sequence(sets: &[RegionSet], delta: usize) -> Result<Vec<RegionMapping>> {
    sets.par_windows(2).map(|w| map_regions(&w[0], &w[1], delta)).collect()
}

/// One detected ROI.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_index: usize,
    pub region: u32,
    pub bbox: BBox,
}

/// ROIs ending at each frame from `K - 1` on, found over the `K`-frame
/// window that ends there.
pub fn detect_sequence(sets: &[RegionSet], delta: usize, k: usize, roi_threshold: usize) -> Result<Vec<Detection>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("K must be at least 2, got {k}")));
    }
    let mappings = map_sequence(sets, delta)?;
    let mut out = Vec::new();
    for t in k - 1..sets.len() {
        let window = &mappings[t + 1 - k..t];
        let frame = sets[t].frame_index;
        for c in detect_rois(window, roi_threshold)? {
            if !c.is_roi || c.end_frame() != frame {
                continue;
            }
            let region = c.last_region();
            if let Some(r) = sets[t].region(region) {
                out.push(Detection { frame_index: frame, region, bbox: r.bbox });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOutcome {
    pub detections: Vec<Detection>,
    pub counts: Option<DetectionCounts>,
    pub scores: Option<Scores>,
    pub report: String,
}

/// Denoise, map and detect; writes `detections.txt` and `detect_report.tsv`.
pub fn cmd_detect(config: &PipelineConfig) -> Result<DetectOutcome> {
    let (seq, gt) = load_input(config)?;
    if seq.frames.len() < config.k {
        return Err(Error::InsufficientHistory { needed: config.k, have: seq.frames.len() });
    }
    let sets = denoise_sequence(&seq.frames, &config.noise_params())?;
    let detections = detect_sequence(&sets, config.delta, config.k, config.roi_threshold)?;

    let mut counts = None;
    if let Some(gt) = &gt {
        let by_frame = gt.by_frame();
        let mut c = DetectionCounts::default();
        for f in &seq.frames[config.k - 1..] {
            let t = f.frame_index();
            let pred: Vec<BBox> = detections.iter().filter(|d| d.frame_index == t).map(|d| d.bbox).collect();
            let truth = by_frame.get(&t).map(Vec::as_slice).unwrap_or(&[]);
            c += match_detections(&pred, truth, config.r_min)?;
        }
        counts = Some(c);
    }
    let scores = counts.as_ref().map(f1_score);

    let mut report = Report::new(config, "detect", &seq.name);
    report.row("frames", seq.frames.len());
    report.row("detections", detections.len());
    if let (Some(c), Some(s)) = (&counts, &scores) {
        report.row("true_positives", c.true_positives);
        report.row("false_positives", c.false_positives);
        report.row("false_negatives", c.false_negatives);
        report.row("precision", format!("{:.6}", s.precision));
        report.row("recall", format!("{:.6}", s.recall));
        report.row("f1", format!("{:.6}", s.f1));
    }

    prepare_out(config)?;
    let mut lines = String::new();
    for d in &detections {
        let b = d.bbox;
        let _ = writeln!(lines, "{} {} {} {} {} {}", d.frame_index, d.region, b.x, b.y, b.w, b.h);
    }
    write_atomic(&config.out.join("detections.txt"), lines.as_bytes())?;
    if config.overlays {
        for (f, set) in seq.frames.iter().zip(&sets) {
            let masks: Vec<(u32, &[u32])> = detections
                .iter()
                .filter(|d| d.frame_index == f.frame_index())
                .filter_map(|d| set.region(d.region).map(|r| (d.region, r.pixels.as_slice())))
                .collect();
            let png = encode_png(&render_masks(f, &masks))?;
            write_atomic(&overlay_path(&config.out, f.frame_index()), &png)?;
        }
    }
    write_atomic(&config.out.join("detect_report.tsv"), report.text.as_bytes())?;
    Ok(DetectOutcome { detections, counts, scores, report: report.text })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutcome {
    pub run: TrackingRun,
    pub success_rate: Option<f64>,
    pub curve: Option<SrCurve>,
    pub report: String,
}

/// Full tracking run; writes `tracks.txt`, `track_report.tsv` and, with
/// ground truth, `sr_curve.tsv`. Scores cover frames from `K` on, the first
/// frame the tracker emits records for.
pub fn cmd_track(config: &PipelineConfig) -> Result<TrackOutcome> {
    let (seq, gt) = load_input(config)?;
    if seq.frames.len() < config.k + 1 {
        return Err(Error::InsufficientHistory { needed: config.k + 1, have: seq.frames.len() });
    }
    let sets = denoise_sequence(&seq.frames, &config.noise_params())?;
    let run = track_sequence(sets, config.tracker_params(true))?;

    let first = seq.frames[config.k].frame_index();
    let mut success_rate = None;
    let mut curve = None;
    if let Some(gt) = &gt {
        success_rate = Some(success_rate_since(&run.records, gt, config.r_min, first)?);
        curve = Some(sr_curve_since(&run.records, gt, &threshold_grid(SR_CURVE_STEP), first)?);
    }

    let mut report = Report::new(config, "track", &seq.name);
    report.row("frames", seq.frames.len());
    report.row("tracks", run.tracks.len());
    report.row("records", run.records.len());
    if let Some(sr) = success_rate {
        report.row("success_rate", format!("{sr:.6}"));
    }
    let flagged = run.occlusions.iter().filter(|o| o.flagged).count();
    report.row("occlusion_events", flagged);
    for o in run.occlusions.iter().filter(|o| o.flagged) {
        report.row(
            "occlusion",
            format!(
                "frame={} occludee={} occluder={} d_e={:.3} delta_area={} od={:.6}",
                o.frame_index, o.occludee, o.occluder, o.d_e, o.delta_area, o.od
            ),
        );
    }

    prepare_out(config)?;
    write_atomic(&config.out.join("tracks.txt"), records_to_text(&run.records).as_bytes())?;
    if let Some(c) = &curve {
        let mut text = String::from("threshold\tsr\n");
        for &(r, sr) in &c.points {
            let _ = writeln!(text, "{r:.2}\t{sr:.6}");
        }
        write_atomic(&config.out.join("sr_curve.tsv"), text.as_bytes())?;
    }
    if config.overlays {
        for f in &seq.frames[config.k..] {
            let t = f.frame_index();
            let masks: Vec<(u32, &[u32])> = run
                .records
                .iter()
                .filter(|r| r.frame_index == t && r.status != TrackStatus::Lost)
                .filter_map(|r| {
                    let track = run.tracks.iter().find(|tr| tr.id() == r.track_id)?;
                    track.mask_at(t).map(|m| (r.track_id, m))
                })
                .collect();
            let png = encode_png(&render_masks(f, &masks))?;
            write_atomic(&overlay_path(&config.out, t), &png)?;
        }
    }
    write_atomic(&config.out.join("track_report.tsv"), report.text.as_bytes())?;
    Ok(TrackOutcome { run, success_rate, curve, report: report.text })
}

/// Timing and candidate statistics of one search mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchMode {
    pub optimize: bool,
    pub mean_ms: f64,
    pub mean_examined: f64,
    pub run: TrackingRun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub optimized: BenchMode,
    pub unoptimized: BenchMode,
    pub mean_pruned: f64,
    pub mean_full: f64,
    pub identical: bool,
    pub report: String,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Denoise plus track, timed per frame on one thread. File I/O is excluded.
fn bench_mode(frames: &[DepthMap], config: &PipelineConfig, optimize: bool) -> Result<BenchMode> {
    let noise = config.noise_params();
    let params = TrackerParams { optimize, ..config.tracker_params(false) };
    let mut tracker = Tracker::new(params)?;
    let mut run = TrackingRun::default();
    let mut ms = Vec::with_capacity(frames.len());
    for f in frames {
        let start = Instant::now();
        let set = denoise(f, &noise)?;
        let out = tracker.process(set)?;
        ms.push(start.elapsed().as_secs_f64() * 1e3);
        run.records.extend(out.records);
        run.occlusions.extend(out.occlusions);
        run.search.extend(out.search);
    }
    run.tracks = tracker.tracks().to_vec();
    let mean_examined = mean(run.search.iter().map(|s| s.examined as f64));
    Ok(BenchMode { optimize, mean_ms: mean(ms.into_iter()), mean_examined, run })
}

/// Runs the pipeline with the pruned search on and off and compares them.
pub fn cmd_bench(config: &PipelineConfig) -> Result<BenchOutcome> {
    let (seq, _) = load_input(config)?;
    let unoptimized = bench_mode(&seq.frames, config, false)?;
    let optimized = bench_mode(&seq.frames, config, true)?;

    if let Some(s) = optimized.run.search.iter().find(|s| s.pruned > s.full) {
        return Err(Error::Invariant(format!(
            "frame {} track {}: {} pruned candidates exceed {} full",
            s.frame_index, s.track_id, s.pruned, s.full
        )));
    }
    let mean_pruned = mean(optimized.run.search.iter().map(|s| s.pruned as f64));
    let mean_full = mean(optimized.run.search.iter().map(|s| s.full as f64));
    let identical = records_to_text(&optimized.run.records) == records_to_text(&unoptimized.run.records);
    let speedup = if optimized.mean_ms > 0.0 { unoptimized.mean_ms / optimized.mean_ms } else { 1.0 };

    let mut report = Report::new(config, "bench", &seq.name);
    report.row("frames", seq.frames.len());
    report.row("mean_ms_optimized", format!("{:.3}", optimized.mean_ms));
    report.row("mean_ms_unoptimized", format!("{:.3}", unoptimized.mean_ms));
    report.row("speedup", format!("{speedup:.3}"));
    report.row("searches", optimized.run.search.len());
    report.row("mean_pruned_candidates", format!("{mean_pruned:.3}"));
    report.row("mean_full_candidates", format!("{mean_full:.3}"));
    report.row("mean_examined_optimized", format!("{:.3}", optimized.mean_examined));
    report.row("mean_examined_unoptimized", format!("{:.3}", unoptimized.mean_examined));
    report.row("outputs_identical", identical);

    prepare_out(config)?;
    write_atomic(&config.out.join("bench_report.tsv"), report.text.as_bytes())?;
    Ok(BenchOutcome { optimized, unoptimized, mean_pruned, mean_full, identical, report: report.text })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutcome {
    pub manifest: PathBuf,
    pub frame_files: Vec<PathBuf>,
    pub ground_truth: PathBuf,
}

/// Renders a TOML scene spec into `out`: one 16-bit PGM per frame, `gt.txt`
/// and `manifest.txt`. The spec is validated before anything is written.
pub fn cmd_synth(spec_path: &Path, seed: u64, out: &Path) -> Result<SynthOutcome> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let spec = SceneSpec::from_toml(&text)?;
    spec.validate()?;
    let scene = synthesize_scene(&spec, seed)?;

    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut names = Vec::with_capacity(scene.frames.len());
    let mut frame_files = Vec::with_capacity(scene.frames.len());
    for (i, f) in scene.frames.iter().enumerate() {
        let name = format!("frame_{i:06}.pgm");
        let path = out.join(&name);
        write_atomic(&path, &encode_pgm(&f.depth))?;
        names.push(name);
        frame_files.push(path);
    }
    let ground_truth = out.join("gt.txt");
    write_atomic(&ground_truth, scene.ground_truth.to_text().as_bytes())?;
    let manifest = out.join("manifest.txt");
    write_atomic(&manifest, write_manifest(&names, Some("gt.txt")).as_bytes())?;
    Ok(SynthOutcome { manifest, frame_files, ground_truth })
}

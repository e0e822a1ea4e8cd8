//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use rgtrack::depth_io::{synthesize_scene, Actor, GroundTruth, NoiseRecipe, SceneSpec, SyntheticScene};
use rgtrack::eval::{f1_from, sr_curve_since, success_rate_since};
use rgtrack::noise_filter::{denoise, gaussian_smooth, watershed_segment, NoiseParams, RegionLabelMap, RegionSet};
use rgtrack::pipeline::{cmd_detect, cmd_synth, cmd_track, denoise_sequence, PipelineConfig};
use rgtrack::region_graph::{assign_weights, build_graph, candidate_regions, node_table};
use rgtrack::roi_detect::{detect_rois, map_regions, Cardinal, CardinalDirection};
use rgtrack::tracker::{records_to_text, track_sequence, TrackStatus, TrackerParams, TrackingRun};

/// Tolerance on F1 in percentage points.
const F1_TOL_PP: f64 = 0.01;
/// Largest per-edge box error accepted in end-to-end tracking.
const BOX_TOL_PX: u32 = 1;
/// Half-width of the frame window around the oracle contact frame.
const CONTACT_TOL_FRAMES: usize = 2;
const R_MIN: f64 = 0.5;
/// Minimum pixel IoU between a surviving region and its actor.
const SURVIVOR_IOU: f64 = 0.9;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scene(spec: &SceneSpec, seed: u64) -> SyntheticScene {
    synthesize_scene(spec, seed).expect("valid scene")
}

fn track(scene: &SyntheticScene, optimize: bool) -> TrackingRun {
    let sets = denoise_sequence(&scene.depth_frames(), &NoiseParams::default()).unwrap();
    track_sequence(sets, TrackerParams { optimize, ..TrackerParams::default() }).unwrap()
}

fn table1_f1() -> Outcome {
    // precision, recall and F1 (percent) as printed in the detection table
    let rows = [(0.91, 0.84, 87.36), (0.96, 0.81, 87.86), (0.93, 0.84, 88.27), (1.0, 1.0, 100.0)];
    let mut worst: f64 = 0.0;
    for (p, r, want) in rows {
        let got = 100.0 * f1_from(p, r);
        worst = worst.max((got - want).abs());
        check((got - want).abs() <= F1_TOL_PP, || format!("f1({p}, {r}) = {got:.4}%, want {want}%"))?;
    }
    Ok(format!("max deviation {worst:.4} pp"))
}

fn noise_suppression() -> Outcome {
    // 200x150 = 30000 px and 200x140 = 28000 px
    let mut blob_total = 0;
    for seed in 0..20u64 {
        let spec = SceneSpec::new(1, 480, 360)
            .with_actor(Actor::rect(20, 20, 200, 150, 1500))
            .with_actor(Actor::rect(250, 200, 200, 140, 2500))
            .with_noise(NoiseRecipe {
                sensor_stddev: 4.0,
                blob_count: 8,
                blob_area: [100, 3000],
                hole_probability: 0.0,
                static_blobs: false,
            });
        let s = scene(&spec, seed);
        let f = &s.frames[0];
        check(f.blobs.len() >= 5, || format!("seed {seed}: only {} blobs placed", f.blobs.len()))?;
        blob_total += f.blobs.len();
        let set = denoise(&f.depth, &NoiseParams::default()).unwrap();
        let survivors: Vec<_> = set.closed().collect();
        check(survivors.len() == 2, || {
            let areas: Vec<usize> = survivors.iter().map(|r| r.area()).collect();
            format!("seed {seed}: {} closed regions survive, areas {areas:?}", survivors.len())
        })?;
        for actor in 1..=2u16 {
            let truth: Vec<u32> =
                (0..f.actor_ids.len()).filter(|&p| f.actor_ids[p] == actor).map(|p| p as u32).collect();
            let best = survivors.iter().map(|r| pixel_iou(&r.pixels, &truth)).fold(0.0, f64::max);
            check(best >= SURVIVOR_IOU, || format!("seed {seed}: actor {actor} best IoU {best:.3}"))?;
        }
    }
    Ok(format!("20 scenes, {blob_total} blobs, 0 failures"))
}

fn watershed_partition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2016);
    let mut total = 0;
    for case in 0..50 {
        let (w, h) = (rng.random_range(48..=128u32), rng.random_range(48..=128u32));
        let mut spec = SceneSpec::new(1, w, h);
        let mut placed: Vec<(i64, i64, i64, i64)> = Vec::new();
        for _ in 0..rng.random_range(1..=5) {
            let size = rng.random_range(8..=24i64);
            let x = rng.random_range(3..=i64::from(w) - size - 3);
            let y = rng.random_range(3..=i64::from(h) - size - 3);
            // keep a 6 px gap so distinct objects never share a ridge
            if placed.iter().any(|&(px, py, pw, ph)| x < px + pw + 6 && px < x + size + 6 && y < py + ph + 6 && py < y + size + 6) {
                continue;
            }
            placed.push((x, y, size, size));
            let depth = rng.random_range(1000..=6000u16);
            let actor = if rng.random_bool(0.5) {
                Actor::rect(x, y, size as u32, size as u32, depth)
            } else {
                Actor::disc(x, y, size as u32, depth)
            };
            spec = spec.with_actor(actor);
        }
        let raw = scene(&spec, case).frames[0].depth.clone();
        let labels: RegionLabelMap = watershed_segment(&gaussian_smooth(&raw, 1.0).unwrap());
        check(labels.labels.len() == (w * h) as usize, || format!("case {case}: label count"))?;
        check(labels.labels.iter().all(|&l| l >= 1), || format!("case {case}: unlabelled pixel"))?;
        let max = labels.max_label() as usize;
        check(labels.distinct_labels() == max, || format!("case {case}: labels not dense"))?;
        let foreground = max - 1;
        let oracle = component_count(&raw, spec.background);
        check(foreground == oracle, || format!("case {case} ({w}x{h}): {foreground} regions vs {oracle} components"))?;
        total += oracle;
    }
    Ok(format!("50 frames, {total} components matched"))
}

/// Accumulated displacement of the lineage starting at the actor region.
fn lineage_displacement(v: i64, k: usize) -> (usize, bool, usize) {
    let spec = SceneSpec::new(k, 160, 120).with_actor(Actor::rect(20, 50, 10, 10, 1500).moving(v, 0));
    let s = scene(&spec, 0);
    let sets: Vec<RegionSet> = s.frames.iter().map(|f| denoise(&f.depth, &NoiseParams::default()).unwrap()).collect();
    let maps: Vec<_> = sets.windows(2).map(|w| map_regions(&w[0], &w[1], 80).unwrap()).collect();
    let start = sets[0].labels[(55 * 160 + 25) as usize];
    let cands = detect_rois(&maps, 70).unwrap();
    let c = cands.iter().find(|c| c.start_frame == 0 && c.lineage[0] == start).expect("actor lineage");
    let oracle = (1..k)
        .map(|t| set_difference(&spec.actors[0].pixels(t - 1, 160, 120), &spec.actors[0].pixels(t, 160, 120)))
        .sum();
    (c.accumulated, c.is_roi, oracle)
}

fn roi_detection() -> Outcome {
    let mut prev = 0;
    let mut flags = Vec::new();
    for v in [0, 1, 2, 4, 8] {
        let (acc, roi, oracle) = lineage_displacement(v, 5);
        check(acc == oracle, || format!("v={v}: accumulated {acc}, oracle {oracle}"))?;
        check(acc >= prev, || format!("v={v}: accumulated {acc} below slower {prev}"))?;
        check(roi == (acc > 70), || format!("v={v}: roi flag {roi} with {acc}"))?;
        prev = acc;
        flags.push((v, acc, roi));
    }
    check(flags[2] == (2, 80, true), || format!("v=2 gives {:?}", flags[2]))?;
    check(!flags[0].2, || "static actor marked ROI".into())?;
    let roi_flags: Vec<bool> = flags.iter().map(|f| f.2).collect();
    check(roi_flags.windows(2).all(|p| p[0] <= p[1]), || "ROI flag not monotone".into())?;
    Ok(format!("(v, accumulated, roi) = {flags:?}"))
}

fn fig6_graph() -> Outcome {
    let tiles = [[1, 2, 2, 4], [1, 3, 7, 5], [6, 3, 7, 5], [6, 8, 8, 5]];
    let labels: Vec<u32> = (0..1600).map(|p| tiles[p / 40 / 10][p % 40 / 10]).collect();
    let set = RegionSet::from_label_map(&RegionLabelMap::new(40, 40, labels), 0);
    let g = build_graph(&set);
    let wg = assign_weights(&g, &node_table(&g, 3).unwrap());
    let ones: BTreeSet<(u32, u32)> = wg.weighted_edges().filter(|e| e.2 == 1).map(|e| (e.0, e.1)).collect();
    let want: BTreeSet<(u32, u32)> = [(1, 3), (2, 3), (3, 6), (3, 7), (3, 8)].into();
    check(ones == want, || format!("weight-1 edges {ones:?}"))?;
    let west = candidate_regions(&wg, 3, Some(CardinalDirection::single(Cardinal::West)));
    check(west == BTreeSet::from([1, 6]), || format!("west candidates {west:?}"))?;
    Ok("weight-1 edges and West candidates match".into())
}

fn end_to_end(scene: &SyntheticScene, run: &TrackingRun, k: usize) -> Result<(f64, u32), String> {
    let sr = success_rate_since(&run.records, &scene.ground_truth, R_MIN, k).unwrap();
    let mut worst = 0;
    for g in scene.ground_truth.records().iter().filter(|g| g.frame_index >= k) {
        let err = run
            .records
            .iter()
            .filter(|r| r.frame_index == g.frame_index && r.status != TrackStatus::Lost)
            .map(|r| edge_error(&r.bbox, &g.bbox))
            .min()
            .ok_or_else(|| format!("frame {}: no track for object {}", g.frame_index, g.object_id))?;
        worst = worst.max(err);
    }
    Ok((sr, worst))
}

fn tracking() -> Outcome {
    let s = scene(&two_actor_scene(100), 6);
    let run = track(&s, true);
    let (sr, worst) = end_to_end(&s, &run, 5)?;
    check(sr == 1.0, || format!("SR {sr}"))?;
    check(worst <= BOX_TOL_PX, || format!("box error {worst} px"))?;
    let ids: BTreeSet<u32> = run.records.iter().map(|r| r.track_id).collect();
    check(ids.len() == 2, || format!("{} track ids", ids.len()))?;
    Ok(format!("SR {sr:.3}, max box error {worst} px, {} records", run.records.len()))
}

/// First frame where the two actors' full masks overlap or touch.
fn contact_frame(spec: &SceneSpec) -> usize {
    let (w, h) = (spec.width, spec.height);
    (0..spec.frames)
        .find(|&t| {
            let a = spec.actors[0].pixels(t, w, h);
            let b: std::collections::HashSet<u32> = spec.actors[1].pixels(t, w, h).into_iter().collect();
            a.iter().any(|&p| {
                let (x, y) = (i64::from(p % w), i64::from(p / w));
                (-1..=1).any(|dy| {
                    (-1..=1).any(|dx| {
                        let (nx, ny) = (x + dx, y + dy);
                        nx >= 0 && ny >= 0 && nx < i64::from(w) && ny < i64::from(h) && b.contains(&((ny as u32) * w + nx as u32))
                    })
                })
            })
        })
        .expect("actors meet")
}

fn occlusion() -> Outcome {
    let spec = occlusion_scene();
    let s = scene(&spec, 7);
    let run = track(&s, true);
    let f = contact_frame(&spec);
    let first = run.occlusions.iter().find(|o| o.flagged).ok_or("no occlusion flagged")?;
    check(first.frame_index + CONTACT_TOL_FRAMES >= f && first.frame_index <= f + CONTACT_TOL_FRAMES, || {
        format!("first flag at frame {}, contact at {f}", first.frame_index)
    })?;
    // the far actor (object 2) loses area once the near one covers it
    let far = s.ground_truth.records().iter().find(|g| g.object_id == 2 && g.frame_index == 5).unwrap().bbox;
    let far_track = run
        .records
        .iter()
        .filter(|r| r.frame_index == 5)
        .max_by(|a, b| box_iou(&a.bbox, &far).total_cmp(&box_iou(&b.bbox, &far)))
        .ok_or("no records at frame 5")?
        .track_id;
    check(first.occludee == far_track, || format!("occludee {} but far actor is track {far_track}", first.occludee))?;

    let (mut strict, mut degenerate) = (0, 0);
    for o in &run.occlusions {
        let da = o.delta_area as f64;
        let lower = o.od >= da / 2.0;
        let upper = if o.delta_area == 0 || o.d_e > 36.0 {
            // ΔA = 0 collapses the interval; for d_e > 36, e^-d_e + 1 == 1 in f64
            degenerate += 1;
            o.od <= da && (o.od * ((-o.d_e).exp() + 1.0) - da).abs() < 1e-9 * da.max(1.0)
        } else {
            strict += 1;
            o.od < da
        };
        check(lower && upper, || format!("OD {} outside [{}, {}) at d_e {}", o.od, da / 2.0, da, o.d_e))?;
    }
    Ok(format!(
        "contact {f}, first flag {} (occludee {}), {strict} pairs in [dA/2, dA), {degenerate} at the f64 limit",
        first.frame_index, first.occludee
    ))
}

fn optimisation_equivalence() -> Outcome {
    let scenes = [
        ("two-actor", scene(&two_actor_scene(100), 6)),
        ("occlusion", scene(&occlusion_scene(), 7)),
        ("four-actor", scene(&four_actor_scene(), 8)),
    ];
    let mut notes = Vec::new();
    for (name, s) in &scenes {
        let on = track(s, true);
        let off = track(s, false);
        check(records_to_text(&on.records) == records_to_text(&off.records), || format!("{name}: outputs differ"))?;
        let sets = denoise_sequence(&s.depth_frames(), &NoiseParams::default()).unwrap();
        let mean_regions = sets.iter().map(|r| r.closed_count()).sum::<usize>() as f64 / sets.len() as f64;
        let n = on.search.len().max(1) as f64;
        let pruned = on.search.iter().map(|x| x.pruned).sum::<usize>() as f64 / n;
        let full = on.search.iter().map(|x| x.full).sum::<usize>() as f64 / n;
        check(on.search.iter().all(|x| x.pruned <= x.full), || format!("{name}: pruned above full"))?;
        if mean_regions >= 4.0 {
            check(pruned < full, || format!("{name}: mean pruned {pruned:.2} not below full {full:.2}"))?;
        }
        notes.push(format!("{name} {pruned:.2}/{full:.2} over {mean_regions:.1} regions"));
    }
    Ok(format!("identical; mean pruned/full: {}", notes.join(", ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("scene.toml");
    std::fs::write(&spec_path, occlusion_scene().to_toml()).unwrap();
    let run = || {
        let seq = dir.path().join("seq");
        let out = dir.path().join("out");
        let _ = std::fs::remove_dir_all(&seq);
        let _ = std::fs::remove_dir_all(&out);
        let synth = cmd_synth(&spec_path, 11, &seq).unwrap();
        let cfg = PipelineConfig { manifest: synth.manifest, out: out.clone(), overlays: true, ..PipelineConfig::default() };
        cmd_track(&cfg).unwrap();
        cmd_detect(&PipelineConfig { out: out.join("detect"), ..cfg }).unwrap();
        (snapshot(&seq), snapshot(&out))
    };
    let (seq_a, out_a) = run();
    let (seq_b, out_b) = run();
    check(seq_a == seq_b, || "synthesized sequence differs".into())?;
    check(out_a == out_b, || "reports or overlays differ".into())?;
    let pngs = out_a.iter().filter(|(n, _)| n.ends_with(".png")).count();
    Ok(format!("{} sequence files, {} outputs ({pngs} overlays) identical", seq_a.len(), out_a.len()))
}

fn sr_monotone() -> Outcome {
    let grid: Vec<f64> = (1..=9).map(|i| f64::from(i) / 10.0).collect();
    let scenes = [scene(&two_actor_scene(100), 6), scene(&occlusion_scene(), 7), scene(&four_actor_scene(), 8)];
    let mut shown = Vec::new();
    for s in &scenes {
        for optimize in [true, false] {
            let run = track(s, optimize);
            let gt: &GroundTruth = &s.ground_truth;
            let curve = sr_curve_since(&run.records, gt, &grid, 5).unwrap();
            check(curve.is_non_increasing(), || format!("curve {:?}", curve.points))?;
            if optimize {
                shown.push(format!("{:.2}..{:.2}", curve.points[0].1, curve.points[8].1));
            }
        }
    }
    Ok(format!("6 streams non-increasing, SR(0.1)..SR(0.9): {}", shown.join(", ")))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("1 f1 arithmetic", Duration::from_secs(1), table1_f1),
        ("2 noise suppression", Duration::from_secs(5), noise_suppression),
        ("3 watershed partition", Duration::from_secs(10), watershed_partition),
        ("4 roi detection", Duration::from_secs(5), roi_detection),
        ("5 region graph fixture", Duration::from_secs(1), fig6_graph),
        ("6 end-to-end tracking", Duration::from_secs(60), tracking),
        ("7 occlusion", Duration::from_secs(30), occlusion),
        ("8 optimisation equivalence", Duration::from_secs(120), optimisation_equivalence),
        ("9 determinism", Duration::from_secs(120), determinism),
        ("10 sr monotonicity", Duration::from_secs(120), sr_monotone),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > limit => Err(format!("took {took:.2?}, limit {limit:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {name} ({took:.2?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}): {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

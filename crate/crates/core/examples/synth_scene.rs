//! Writes a two-actor scene to disk and loads it back through its manifest.
//!
//! Usage: `cargo run --example synth_scene [out_dir]`

use rgtrack::depth_io::{load_sequence, Actor, NoiseRecipe, SceneSpec};
use rgtrack::pipeline::cmd_synth;

fn main() -> rgtrack::error::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/synth_scene".into());
    let spec = SceneSpec::new(20, 320, 240)
        .with_actor(Actor::rect(10, 20, 40, 40, 1500).moving(3, 0))
        .with_actor(Actor::disc(250, 150, 40, 2500).moving(-3, 0))
        .with_noise(NoiseRecipe { sensor_stddev: 3.0, blob_count: 5, blob_area: [60, 400], ..Default::default() });
    println!("{}", spec.to_toml());

    let out = std::path::Path::new(&out);
    std::fs::create_dir_all(out).expect("create output directory");
    let spec_path = out.join("scene.toml");
    std::fs::write(&spec_path, spec.to_toml()).expect("write spec");

    let written = cmd_synth(&spec_path, 42, &out.join("seq"))?;
    let seq = load_sequence(&written.manifest)?;
    let size = seq.frame_size();
    let gt = seq.ground_truth.expect("synth writes ground truth");
    println!("{} frames of {size:?}, {} ground-truth boxes", seq.frames.len(), gt.len());
    for r in gt.in_frame(0) {
        println!("  object {} at {:?}", r.object_id, r.bbox);
    }
    Ok(())
}

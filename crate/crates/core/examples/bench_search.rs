//! Times tracking with and without direction pruning on a four-actor scene.

use rgtrack::depth_io::{Actor, NoiseRecipe, SceneSpec};
use rgtrack::pipeline::{cmd_bench, cmd_synth, PipelineConfig};

fn main() -> rgtrack::error::Result<()> {
    let dir = std::env::temp_dir().join("rgtrack_bench");
    let _ = std::fs::create_dir_all(&dir);
    let spec = SceneSpec::new(60, 320, 240)
        .with_actor(Actor::rect(10, 10, 30, 30, 1500).moving(3, 0))
        .with_actor(Actor::rect(280, 60, 30, 30, 2000).moving(-3, 0))
        .with_actor(Actor::rect(60, 200, 28, 28, 2500).moving(0, -2))
        .with_actor(Actor::rect(200, 40, 26, 26, 3000).moving(0, 2))
        .with_noise(NoiseRecipe { blob_count: 8, blob_area: [60, 300], static_blobs: true, ..Default::default() });
    let spec_path = dir.join("scene.toml");
    std::fs::write(&spec_path, spec.to_toml()).expect("write spec");
    let seq = cmd_synth(&spec_path, 1, &dir.join("seq"))?;

    let cfg = PipelineConfig { manifest: seq.manifest, out: dir.join("out"), ..PipelineConfig::default() };
    let b = cmd_bench(&cfg)?;
    print!("{}", b.report);
    Ok(())
}

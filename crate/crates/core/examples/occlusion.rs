//! A near actor slides over a far one; prints each evaluated pair and the
//! frames where occlusion is flagged.

use rgtrack::depth_io::{synthesize_scene, Actor, NoiseRecipe, SceneSpec};
use rgtrack::noise_filter::NoiseParams;
use rgtrack::pipeline::denoise_sequence;
use rgtrack::tracker::{track_sequence, TrackerParams};

fn main() {
    let spec = SceneSpec::new(30, 320, 240)
        .with_actor(Actor::rect(201, 100, 40, 40, 1200).moving(-3, 0))
        .with_actor(Actor::rect(40, 100, 40, 40, 3000).moving(3, 0))
        .with_noise(NoiseRecipe { blob_count: 6, blob_area: [60, 300], static_blobs: true, ..Default::default() });
    let scene = synthesize_scene(&spec, 7).unwrap();
    let sets = denoise_sequence(&scene.depth_frames(), &NoiseParams::default()).unwrap();
    let run = track_sequence(sets, TrackerParams::default()).unwrap();

    for o in &run.occlusions {
        println!(
            "frame {:2}: {} behind {}? d_e {:7.2} dA {:4} OD {:8.3}{}",
            o.frame_index,
            o.occludee,
            o.occluder,
            o.d_e,
            o.delta_area,
            o.od,
            if o.flagged { "  OCCLUDED" } else { "" }
        );
    }
    for r in run.records.iter().filter(|r| r.frame_index >= 20) {
        println!("{r}");
    }
}

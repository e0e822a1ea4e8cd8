//! Tracks two actors through a 60-frame scene and scores the stream.

use rgtrack::depth_io::{synthesize_scene, Actor, NoiseRecipe, SceneSpec};
use rgtrack::eval::{success_rate_since, DEFAULT_R_MIN};
use rgtrack::noise_filter::NoiseParams;
use rgtrack::pipeline::denoise_sequence;
use rgtrack::tracker::{records_to_text, track_sequence, TrackerParams};

fn main() {
    let spec = SceneSpec::new(60, 320, 240)
        .with_actor(Actor::rect(10, 20, 40, 40, 1500).moving(3, 1))
        .with_actor(Actor::rect(270, 170, 36, 36, 2500).moving(-3, 0))
        .with_noise(NoiseRecipe { blob_count: 6, blob_area: [60, 300], static_blobs: true, ..Default::default() });
    let scene = synthesize_scene(&spec, 6).unwrap();
    let sets = denoise_sequence(&scene.depth_frames(), &NoiseParams::default()).unwrap();

    let params = TrackerParams::default();
    let run = track_sequence(sets, params).unwrap();
    print!("{}", records_to_text(&run.records[..10.min(run.records.len())]));
    println!("...");
    for t in &run.tracks {
        println!("track {} born at {} status {} heading {:?}", t.id(), t.birth_frame(), t.status(), t.direction().map(|d| d.to_string()));
    }
    let sr = success_rate_since(&run.records, &scene.ground_truth, DEFAULT_R_MIN, params.k).unwrap();
    println!("success rate at r = {DEFAULT_R_MIN}: {sr:.3}");
}

//! Denoises one noisy frame and shows which regions survive the mean-area
//! threshold.

use rgtrack::depth_io::{synthesize_scene, Actor, NoiseRecipe, SceneSpec};
use rgtrack::noise_filter::{categorize_regions, denoise, gaussian_smooth, merge_enclosed, watershed_segment, NoiseParams};

fn main() {
    let spec = SceneSpec::new(1, 480, 360)
        .with_actor(Actor::rect(20, 20, 200, 150, 1500))
        .with_actor(Actor::rect(250, 200, 200, 140, 2500))
        .with_noise(NoiseRecipe { sensor_stddev: 4.0, blob_count: 8, blob_area: [100, 3000], ..Default::default() });
    let frame = synthesize_scene(&spec, 3).unwrap().frames.remove(0).depth;

    let params = NoiseParams::default();
    let labels = watershed_segment(&gaussian_smooth(&frame, params.sigma).unwrap());
    let merged = merge_enclosed(&categorize_regions(&labels, params.border_points, 0));
    println!("watershed: {} regions", labels.distinct_labels());
    for r in merged.closed() {
        println!("  region {:3} area {:6} bbox {:?}", r.id, r.area(), r.bbox);
    }

    let set = denoise(&frame, &params).unwrap();
    println!("tau = {:.1}", set.tau.unwrap_or(0.0));
    for r in set.closed() {
        println!("kept region {} ({} px)", r.id, r.area());
    }
}

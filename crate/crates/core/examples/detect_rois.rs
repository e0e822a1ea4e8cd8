//! Maps regions across a K-frame window and reports which lineages moved
//! far enough to count as ROIs.

use rgtrack::depth_io::{synthesize_scene, Actor, NoiseRecipe, SceneSpec};
use rgtrack::noise_filter::{denoise, NoiseParams};
use rgtrack::roi_detect::{detect_rois, map_regions, DEFAULT_DELTA, DEFAULT_K, DEFAULT_ROI_THRESHOLD};

fn main() {
    let spec = SceneSpec::new(DEFAULT_K, 200, 150)
        .with_actor(Actor::rect(20, 30, 20, 20, 1500).moving(3, 1))
        .with_actor(Actor::rect(120, 90, 30, 30, 2200))
        .with_noise(NoiseRecipe { blob_count: 4, blob_area: [30, 120], static_blobs: true, ..Default::default() });
    let scene = synthesize_scene(&spec, 1).unwrap();
    let sets: Vec<_> = scene.frames.iter().map(|f| denoise(&f.depth, &NoiseParams::default()).unwrap()).collect();
    let mappings: Vec<_> = sets.windows(2).map(|w| map_regions(&w[0], &w[1], DEFAULT_DELTA).unwrap()).collect();

    for m in &mappings {
        for p in &m.pairs {
            println!(
                "{}->{}: region {} -> {} overlap {} moved {} px {}",
                m.prev_frame,
                m.curr_frame,
                p.prev,
                p.curr,
                p.overlap,
                p.displacement,
                p.direction.map(|d| d.to_string()).unwrap_or_default()
            );
        }
    }
    for c in detect_rois(&mappings, DEFAULT_ROI_THRESHOLD).unwrap() {
        let bbox = sets[c.end_frame()].region(c.last_region()).map(|r| r.bbox);
        println!("lineage {:?}: {} px, roi={} ends at {:?}", c.lineage, c.accumulated, c.is_roi, bbox);
    }
}

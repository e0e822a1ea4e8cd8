//! Scores a track stream against ground truth from files.
//!
//! Usage: `cargo run --example evaluate <tracks.txt> <gt.txt> [first_frame]`

use rgtrack::depth_io::GroundTruth;
use rgtrack::eval::{f1_from, sr_curve_since, success_rate_since, threshold_grid, DEFAULT_R_MIN};
use rgtrack::tracker::TrackRecord;

fn main() -> rgtrack::error::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    if args.len() < 3 {
        // without files, reproduce the detection table's F1 column
        for (p, r) in [(0.91, 0.84), (0.96, 0.81), (0.93, 0.84)] {
            println!("precision {p} recall {r} -> F1 {:.2}%", 100.0 * f1_from(p, r));
        }
        eprintln!("usage: evaluate <tracks.txt> <gt.txt> [first_frame]");
        return Ok(());
    }
    let text = std::fs::read_to_string(&args[1]).expect("read tracks");
    let tracks = TrackRecord::parse_stream(&text)?;
    let gt = GroundTruth::load(&args[2])?;
    let first: usize = args.get(3).map_or(0, |s| s.parse().expect("first frame"));

    println!("SR@{DEFAULT_R_MIN} = {:.4}", success_rate_since(&tracks, &gt, DEFAULT_R_MIN, first)?);
    for (r, sr) in sr_curve_since(&tracks, &gt, &threshold_grid(0.1), first)?.points {
        println!("{r:.1}\t{sr:.4}");
    }
    Ok(())
}

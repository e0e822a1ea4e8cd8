use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rgtrack::pipeline::{cmd_bench, cmd_detect, cmd_synth, cmd_track, PipelineConfig};

#[derive(Parser)]
#[command(name = "rgtrack", version, about = "Detect and track moving objects in depth video")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect moving ROIs per frame; scores against ground truth when present.
    Detect(RunArgs),
    /// Track ROIs through the sequence and report the success rate.
    Track(RunArgs),
    /// Time the pipeline with pruned search on and off.
    Bench(RunArgs),
    /// Render a TOML scene spec to frames, ground truth and a manifest.
    Synth {
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = rgtrack::noise_filter::DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = rgtrack::noise_filter::DEFAULT_BORDER_POINTS)]
    border_points: usize,
    #[arg(long, default_value_t = rgtrack::roi_detect::DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = rgtrack::roi_detect::DEFAULT_DELTA)]
    delta: usize,
    #[arg(long, default_value_t = rgtrack::roi_detect::DEFAULT_ROI_THRESHOLD)]
    roi_threshold: usize,
    #[arg(long, default_value_t = rgtrack::tracker::DEFAULT_IOTA)]
    iota: f64,
    #[arg(long, default_value_t = rgtrack::eval::DEFAULT_R_MIN)]
    r_min: f64,
    #[arg(long, overrides_with = "no_optimize")]
    optimize: bool,
    #[arg(long, overrides_with = "optimize")]
    no_optimize: bool,
    /// Write a PNG overlay per frame under `<out>/overlays`.
    #[arg(long)]
    overlays: bool,
}

impl RunArgs {
    fn config(self) -> PipelineConfig {
        PipelineConfig {
            sigma: self.sigma,
            border_points: self.border_points,
            k: self.k,
            delta: self.delta,
            roi_threshold: self.roi_threshold,
            iota: self.iota,
            r_min: self.r_min,
            optimize: self.optimize || !self.no_optimize,
            manifest: self.manifest,
            gt: self.gt,
            out: self.out,
            overlays: self.overlays,
        }
    }
}

fn run(cli: Cli) -> rgtrack::error::Result<String> {
    Ok(match cli.command {
        Command::Detect(a) => cmd_detect(&a.config())?.report,
        Command::Track(a) => cmd_track(&a.config())?.report,
        Command::Bench(a) => cmd_bench(&a.config())?.report,
        Command::Synth { spec, seed, out } => {
            let s = cmd_synth(&spec, seed, &out)?;
            format!("wrote {} frames, manifest {}\n", s.frame_files.len(), s.manifest.display())
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rgtrack: {e}");
            ExitCode::FAILURE
        }
    }
}

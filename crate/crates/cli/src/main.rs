use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vistrace::aov::AovLayer;
use vistrace_cli::{run, Options};

/// Render a scene document to images, annotation layers and boxes.
#[derive(Parser, Debug)]
#[command(name = "vistrace", version)]
struct Args {
    /// Scene document (JSON).
    #[arg(long)]
    scene: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Samples per pixel; overrides the scene.
    #[arg(long)]
    spp: Option<u32>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    /// Comma-separated layers: depth, normal, seg, uv, flow, albedo, position.
    #[arg(long, value_delimiter = ',')]
    aov: Vec<AovLayer>,
    #[arg(long, default_value_t = 1)]
    frames: u32,
    /// Seed for rendering and randomization; overrides the scene.
    #[arg(long)]
    seed: Option<u64>,
    /// Write per-frame bounding boxes as JSON.
    #[arg(long)]
    boxes: bool,
    /// Reject unknown scene keys instead of warning.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = Options {
        scene: args.scene,
        out: args.out,
        spp: args.spp,
        width: args.width,
        height: args.height,
        aovs: args.aov,
        frames: args.frames,
        seed: args.seed,
        boxes: args.boxes,
        strict: args.strict,
        workers: None,
    };
    match run(&opts) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

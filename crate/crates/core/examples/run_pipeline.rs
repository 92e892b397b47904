//! Runs the full synthetic pipeline and prints the evaluation table.
//!
//! ```text
//! cargo run --release -p acfkit --example run_pipeline -- [config.json] [out_dir]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use acfkit::pipeline::{run_all, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mut cfg = match args.next() {
        Some(path) if path != "-" => PipelineConfig::load(&PathBuf::from(path))?,
        _ => PipelineConfig::default(),
    };
    cfg.paths.out_dir = Some(args.next().map(PathBuf::from).unwrap_or_else(|| cfg.out_dir()));
    let started = Instant::now();
    let report = run_all(&cfg)?;
    print!("{}", report.to_text());
    println!("elapsed: {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}

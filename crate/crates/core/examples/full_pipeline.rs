//! Runs every stage on a project config and prints the written files.
//!
//! ```text
//! cargo run --release --example full_pipeline [-- CONFIG OUT_DIR]
//! ```

use std::path::PathBuf;

use cvri::pipeline::{run_pipeline, OutputLayout, ProjectConfig, Stage};
use cvri::synth::bundled_dir;

fn main() -> cvri::Result<()> {
    let mut args = std::env::args().skip(1);
    let config_path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| bundled_dir().join("config.toml"));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cvri-run"));

    let config = ProjectConfig::load(&config_path)?;
    let run = run_pipeline(&config, &Stage::ALL, &out)?;
    let layout = OutputLayout::new(&out);
    println!("{} files under {}", run.written.len(), out.display());
    for p in run
        .written
        .iter()
        .filter(|p| !layout.relative(p).starts_with("layers/"))
    {
        println!("  {}", layout.relative(p));
    }
    if let Some(s) = run.snapshot {
        println!("snapshot {}", s.content_hash());
    }
    Ok(())
}

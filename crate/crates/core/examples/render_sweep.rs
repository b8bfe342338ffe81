//! Runs the pipeline through assess, then renders a sweep of frames with a
//! chosen ramp and a legend.
//!
//! ```text
//! cargo run --release --example render_sweep [-- OUT_DIR RAMP]
//! ```

use std::fs;
use std::path::PathBuf;

use cvri::activity::step_clock;
use cvri::geo::{legend, render_frames, temporal_sweep};
use cvri::pipeline::{run_pipeline, ProjectConfig, Stage};
use cvri::synth::bundled_dir;

fn main() -> cvri::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cvri-sweep"));
    let ramp = args.next().unwrap_or_else(|| "ylorrd".into());

    let config = ProjectConfig::load(bundled_dir().join("config.toml"))?;
    let stages = [Stage::Fit, Stage::Simulate, Stage::Map, Stage::Assess];
    let run = run_pipeline(&config, &stages, &out.join("run"))?;
    let snapshot = run.snapshot.expect("assess leaves a complete snapshot");
    let l = &snapshot.layers;

    let steps: Vec<usize> = (0..96).step_by(12).collect();
    let maps = temporal_sweep(&l.demographic, &l.activity, &l.building_env, &config.weights, &steps)?;
    let pngs = render_frames(&maps, &ramp, 12)?;
    fs::create_dir_all(&out).map_err(|e| cvri::Error::io(&out, e))?;
    for ((t, map), png) in steps.iter().zip(&maps).zip(&pngs) {
        let path = out.join(format!("{ramp}_t{t:03}.png"));
        fs::write(&path, png).map_err(|e| cvri::Error::io(&path, e))?;
        println!(
            "{} mean V {:.3} -> {}",
            step_clock(*t),
            map.mean().unwrap_or(f64::NAN),
            path.display()
        );
    }
    let lg = legend(&maps[0], &ramp)?;
    for e in &lg.entries {
        println!("  {} {} {}", e.value, e.label, e.color);
    }
    Ok(())
}

//! Fits the activity chain from the bundled diaries and prints the initial
//! distribution and the most likely transitions around the morning commute.
//!
//! ```text
//! cargo run --example fit_model [-- model.json]
//! ```

use std::fs::File;

use cvri::activity::{step_clock, ActivityClass};
use cvri::markov::fit;
use cvri::pipeline::{load_diaries, ProjectConfig};
use cvri::synth::bundled_dir;

fn main() -> cvri::Result<()> {
    let config = ProjectConfig::load(bundled_dir().join("config.toml"))?;
    let (diaries, report) = load_diaries(&config)?;
    println!(
        "{} diaries kept, {} dropped",
        report.records_kept, report.records_dropped
    );

    let model = fit(&diaries, &config.fit)?;
    println!("alpha:");
    for c in ActivityClass::ALL {
        println!(
            "  {} {:<24} {:.3}",
            c.label(),
            c.description(),
            model.alpha()[c.index()]
        );
    }

    for t in [28, 32, 36] {
        println!("{} -> {}", step_clock(t), step_clock(t + 1));
        for from in ActivityClass::ALL {
            let row = model.transition(t)[from.index()];
            let (to, p) = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("eight classes");
            println!("  {} -> {} ({p:.2})", from.label(), ActivityClass::ALL[to].label());
        }
    }

    if let Some(path) = std::env::args().nth(1) {
        model.write_json(File::create(&path).map_err(|e| cvri::Error::io(&path, e))?)?;
        println!("wrote {path}");
    }
    Ok(())
}

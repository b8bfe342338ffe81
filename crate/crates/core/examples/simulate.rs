//! Propagates the fitted chain exactly and compares it with Monte Carlo
//! samples drawn from the same model.
//!
//! ```text
//! cargo run --release --example simulate [-- SAMPLES SEED]
//! ```

use cvri::activity::{step_clock, ActivityClass, STEPS};
use cvri::markov::{aggregate, fit, propagate, sample};
use cvri::pipeline::{load_diaries, ProjectConfig};
use cvri::synth::bundled_dir;

fn main() -> cvri::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);

    let config = ProjectConfig::load(bundled_dir().join("config.toml"))?;
    let (diaries, _) = load_diaries(&config)?;
    let model = fit(&diaries, &config.fit)?;

    let exact = propagate(&model);
    let sampled = aggregate(&sample(&model, n, seed), None)?;

    print!("clock ");
    for c in ActivityClass::ALL {
        print!("  {}  ", c.label());
    }
    println!();
    for t in (0..STEPS).step_by(8) {
        print!("{} ", step_clock(t));
        for p in exact.row(t) {
            print!(" {p:.3} ");
        }
        println!("  dominant {}", exact.argmax(t).label());
    }
    println!(
        "{n} samples, seed {seed}: max |sampled - exact| = {:.4}",
        sampled.max_abs_diff(&exact)
    );
    Ok(())
}

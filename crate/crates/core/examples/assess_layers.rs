//! Scores and ranks the three aspects, then recomposes one step under a few
//! weightings to show how V moves with the weights.
//!
//! ```text
//! cargo run --example assess_layers [-- STEP]
//! ```

use cvri::activity::step_clock;
use cvri::mapping::allocate;
use cvri::markov::{fit, propagate};
use cvri::pipeline::{
    assess, community_population, load_buildings, load_demographics, load_diaries, load_zones, ProjectConfig,
};
use cvri::synth::bundled_dir;
use cvri::vri::{AspectLayer, VRIWeights};

fn histogram(layer: &AspectLayer) -> [usize; 5] {
    let mut h = [0; 5];
    for r in layer.ranks.iter().flatten() {
        h[usize::from(*r) - 1] += 1;
    }
    h
}

fn main() -> cvri::Result<()> {
    let t: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let config = ProjectConfig::load(bundled_dir().join("config.toml"))?;
    let (diaries, _) = load_diaries(&config)?;
    let (buildings, _) = load_buildings(&config)?;
    let demo = load_demographics(&config)?;
    let zones = load_zones(&config)?;
    let traj = propagate(&fit(&diaries, &config.fit)?);
    let occ = allocate(
        &traj,
        community_population(&config, &demo),
        &buildings,
        &config.placement,
        &demo,
        &config.mapping.allocation_options(),
    )?;

    let a = assess(&config, &buildings, &demo, &zones, &occ)?;
    println!("{:?}", a.report);
    println!("rank counts 1..5");
    println!("  demographic   {:?}", histogram(&a.ranked.demographic));
    println!("  activity {}  {:?}", step_clock(t), histogram(&a.ranked.activity[t]));
    println!("  building_env  {:?}", histogram(&a.ranked.building_env));

    for raw in [(0.4, 0.35, 0.25), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (1.0, 1.0, 1.0)] {
        let w = VRIWeights::normalized(raw.0, raw.1, raw.2)?;
        let map = a.ranked.compose(t, &w)?;
        println!("q = {:?}: mean V {:.3}", w.as_array(), map.mean().unwrap_or(f64::NAN));
    }
    Ok(())
}

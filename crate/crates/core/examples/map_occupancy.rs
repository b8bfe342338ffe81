//! Allocates the community trajectory onto the bundled building inventory
//! and lists the busiest buildings at a chosen step.
//!
//! ```text
//! cargo run --example map_occupancy [-- STEP]
//! ```

use cvri::activity::{step_clock, ActivityClass, NUM_CLASSES};
use cvri::mapping::allocate;
use cvri::markov::{fit, propagate};
use cvri::pipeline::{community_population, load_buildings, load_demographics, load_diaries, ProjectConfig};
use cvri::synth::bundled_dir;

fn main() -> cvri::Result<()> {
    let t: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let config = ProjectConfig::load(bundled_dir().join("config.toml"))?;
    let (diaries, _) = load_diaries(&config)?;
    let (buildings, _) = load_buildings(&config)?;
    let demo = load_demographics(&config)?;
    let population = community_population(&config, &demo);

    let traj = propagate(&fit(&diaries, &config.fit)?);
    let field = allocate(
        &traj,
        population,
        &buildings,
        &config.placement,
        &demo,
        &config.mapping.allocation_options(),
    )?;

    println!(
        "{} at {}: {:.0} placed, {:.0} unplaced (travel {:.0}, overflow {:.0})",
        population,
        step_clock(t),
        field.placed_total(t),
        field.unplaced_total(t),
        field.unplaced_travel(t).iter().sum::<f64>(),
        field.unplaced_overflow(t).iter().sum::<f64>(),
    );

    let mut busiest: Vec<(usize, f64)> = (0..buildings.len()).map(|i| (i, field.building_total(t, i))).collect();
    busiest.sort_by(|a, b| b.1.total_cmp(&a.1));
    for &(i, total) in busiest.iter().take(10) {
        let cell = field.cell(t, i);
        let main = (0..NUM_CLASSES)
            .max_by(|&a, &b| cell[a].total_cmp(&cell[b]))
            .unwrap_or(0);
        println!(
            "  {} {:<14} {:>7.1} people, mostly {}",
            field.building_ids()[i],
            buildings
                .iter()
                .find(|b| b.building_id == field.building_ids()[i])
                .map_or("?", |b| b.btype.as_str()),
            total,
            ActivityClass::ALL[main].label()
        );
    }
    Ok(())
}

//! Snaps the bundled GPS paths to buildings and labels each slot with the
//! most likely activity class for that building type.
//!
//! ```text
//! cargo run --example gps_join
//! ```

use cvri::activity::step_clock;
use cvri::mapping::join_gps;
use cvri::markov::{fit, propagate};
use cvri::pipeline::{load_buildings, load_diaries, load_gps, ProjectConfig};
use cvri::synth::bundled_dir;

fn main() -> cvri::Result<()> {
    let config = ProjectConfig::load(bundled_dir().join("config.toml"))?;
    let (diaries, _) = load_diaries(&config)?;
    let (buildings, _) = load_buildings(&config)?;
    let Some((paths, report)) = load_gps(&config)? else {
        println!("no GPS input configured");
        return Ok(());
    };
    println!("{} paths kept, {} dropped", report.paths_kept, report.paths_dropped);

    let traj = propagate(&fit(&diaries, &config.fit)?);
    let joined = join_gps(
        &paths,
        &traj,
        &buildings,
        &config.placement,
        config.mapping.snap_radius_m,
    )?;

    let person = &joined[0];
    println!("{}:", person.person_id);
    let mut last = None;
    for (t, step) in person.steps.iter().enumerate() {
        let here = step.as_ref().map(|s| (s.building_id.clone(), s.class));
        if here != last {
            match &here {
                Some((b, c)) => println!("  {} {} in {b}", step_clock(t), c.label()),
                None => println!("  {} away from any building", step_clock(t)),
            }
            last = here;
        }
    }
    let snapped: usize = joined.iter().map(|p| p.steps.iter().flatten().count()).sum();
    println!("{snapped} of {} person-slots snapped", joined.len() * 96);
    Ok(())
}

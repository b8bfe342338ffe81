//! Regenerates the bundled synthetic county.
//!
//! ```text
//! cargo run --example synthetic_county [-- OUT_DIR]
//! ```

use std::path::PathBuf;

use cvri::synth::{bundled_dir, SynthOptions, SyntheticCounty};

fn main() -> cvri::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(bundled_dir);
    let county = SyntheticCounty::generate(&SynthOptions::default())?;
    for path in county.write_to(&out, 42)? {
        println!("wrote {}", path.display());
    }
    println!(
        "{} zones, {} buildings, {} diaries, {} GPS paths",
        county.zones.len(),
        county.buildings.len(),
        county.diaries.len(),
        county.gps.len()
    );
    Ok(())
}

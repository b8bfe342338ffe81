use std::collections::BTreeMap;

use crate::activity::{ActivityClass, STEPS};
use crate::error::{Error, Result};
use crate::ingest::ZoneDemographics;
use crate::mapping::{Building, Construction, EnergyStructure, Glazing, OccupancyField};
use crate::vri::{ActivityVulnerabilityTable, CombineMode, DemographicWeights, EnvWeights};

/// Per-zone `Σ weight × share`.
pub fn score_demographic(zones: &[ZoneDemographics], weights: &DemographicWeights) -> Result<BTreeMap<String, f64>> {
    zones
        .iter()
        .map(|z| {
            let mut score = 0.0;
            for (variable, w) in &weights.0 {
                let share = z.share(variable).ok_or_else(|| Error::MissingVariable {
                    variable: variable.clone(),
                    zone: z.zone_id.clone(),
                })?;
                score += w * share;
            }
            Ok((z.zone_id.clone(), score))
        })
        .collect()
}

/// Per-building `Σ_c count × combined(criticality_c, relevance_c)` at step
/// `t`, in the field's building order.
pub fn score_activity(
    occ: &OccupancyField,
    table: &ActivityVulnerabilityTable,
    t: usize,
    mode: CombineMode,
) -> Result<Vec<f64>> {
    if t >= STEPS {
        return Err(Error::MissingStep(t));
    }
    let factors = ActivityClass::ALL.map(|c| mode.combine(table.rating(c)));
    Ok((0..occ.building_ids().len())
        .map(|b| occ.cell(t, b).iter().zip(&factors).map(|(n, f)| n * f).sum())
        .collect())
}

/// Year at which a building's age score is computed.
pub const AGE_REFERENCE_YEAR: i32 = 2020;
/// Age in years that maps to the maximum age score.
pub const AGE_SPAN_YEARS: f64 = 100.0;

pub fn construction_score(c: Construction) -> f64 {
    match c {
        Construction::LightFrame => 1.0,
        Construction::Wood => 0.75,
        Construction::Masonry => 0.5,
        Construction::Concrete | Construction::Steel => 0.25,
    }
}

pub fn glazing_score(g: Glazing) -> f64 {
    match g {
        Glazing::Single => 1.0,
        Glazing::Double => 0.5,
        Glazing::Triple => 0.0,
    }
}

pub fn energy_score(e: EnergyStructure) -> f64 {
    match e {
        EnergyStructure::AllElectric => 1.0,
        EnergyStructure::Mixed => 0.5,
        EnergyStructure::NonElectric => 0.0,
    }
}

/// Attribute scores in [0, 1], ordered as [`EnvWeights::as_array`]. Floor
/// area is min-max scaled across the given inventory (0 when all equal).
pub fn env_attribute_scores(buildings: &[Building]) -> Vec<[f64; 5]> {
    let areas = buildings.iter().map(|b| b.environment.floor_area_m2);
    let lo = areas.clone().fold(f64::INFINITY, f64::min);
    let hi = areas.fold(f64::NEG_INFINITY, f64::max);
    buildings
        .iter()
        .map(|b| {
            let e = &b.environment;
            let age = f64::from(AGE_REFERENCE_YEAR - e.year_built) / AGE_SPAN_YEARS;
            let area = if hi > lo {
                (e.floor_area_m2 - lo) / (hi - lo)
            } else {
                0.0
            };
            [
                age.clamp(0.0, 1.0),
                area,
                construction_score(e.construction),
                glazing_score(e.glazing),
                energy_score(e.energy_structure),
            ]
        })
        .collect()
}

/// Weighted mean of the attribute scores per building, in input order.
/// All-zero weights give 0.
pub fn score_building_env(buildings: &[Building], weights: &EnvWeights) -> Vec<f64> {
    let w = weights.as_array();
    let total: f64 = w.iter().sum();
    env_attribute_scores(buildings)
        .into_iter()
        .map(|s| {
            if total > 0.0 {
                s.iter().zip(&w).map(|(s, w)| s * w).sum::<f64>() / total
            } else {
                0.0
            }
        })
        .collect()
}

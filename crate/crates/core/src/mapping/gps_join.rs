use std::io::Write;

use serde::Serialize;

use crate::activity::{step_midpoint, ActivityClass, STEPS};
use crate::error::{Error, Result};
use crate::geo::Point;
use crate::ingest::TimeLocationPath;
use crate::mapping::{ActivityPlacementTable, Building};
use crate::markov::TrajectoryMatrix;

pub const DEFAULT_SNAP_RADIUS_M: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepAssignment {
    pub class: ActivityClass,
    pub building_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersonTrajectory {
    pub person_id: String,
    /// One entry per slot; `None` when no building lies within the radius.
    pub steps: Vec<Option<StepAssignment>>,
}

/// Links GPS paths to buildings and activity classes slot by slot.
///
/// The position at a slot is the last fix at or before the slot midpoint (the
/// first fix if none precedes it). It snaps to the nearest building centroid
/// within `radius` (ties to the lexicographically lower id). The class is the
/// most probable one at that slot among classes the placement table sends to
/// the building's type, or the slot's overall most probable class if none do.
pub fn join_gps(
    paths: &[TimeLocationPath],
    traj: &TrajectoryMatrix,
    buildings: &[Building],
    table: &ActivityPlacementTable,
    radius: f64,
) -> Result<Vec<PersonTrajectory>> {
    if paths.is_empty() {
        return Err(Error::NoData("no GPS paths".into()));
    }
    if buildings.is_empty() {
        return Err(Error::NoData("no buildings to snap to".into()));
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::invalid("join_gps", "radius must be finite and non-negative"));
    }
    Ok(paths
        .iter()
        .map(|path| PersonTrajectory {
            person_id: path.person_id.clone(),
            steps: (0..STEPS)
                .map(|t| {
                    let position = position_at(path, step_midpoint(t))?;
                    let b = nearest_building(buildings, &position, radius)?;
                    Some(StepAssignment {
                        class: class_for(traj, table, b, t),
                        building_id: b.building_id.clone(),
                    })
                })
                .collect(),
        })
        .collect())
}

fn position_at(path: &TimeLocationPath, minute: f64) -> Option<Point> {
    let idx = path.points.partition_point(|p| p.t_min <= minute);
    let fix = if idx == 0 {
        path.points.first()
    } else {
        path.points.get(idx - 1)
    };
    fix.map(|f| f.position)
}

fn nearest_building<'a>(buildings: &'a [Building], p: &Point, radius: f64) -> Option<&'a Building> {
    let mut best: Option<(f64, &Building)> = None;
    for b in buildings {
        let d = b.centroid.distance(p);
        if d > radius {
            continue;
        }
        best = match best {
            Some((bd, bb)) if bd < d || (bd == d && bb.building_id <= b.building_id) => Some((bd, bb)),
            _ => Some((d, b)),
        };
    }
    best.map(|(_, b)| b)
}

fn class_for(
    traj: &TrajectoryMatrix,
    table: &ActivityPlacementTable,
    building: &Building,
    step: usize,
) -> ActivityClass {
    let row = traj.row(step);
    ActivityClass::ALL
        .into_iter()
        .filter(|c| table.hosts(*c, building.btype))
        .fold(None::<ActivityClass>, |best, c| match best {
            Some(b) if row[b.index()] >= row[c.index()] => Some(b),
            _ => Some(c),
        })
        .unwrap_or_else(|| traj.argmax(step))
}

/// Writes `person_id,t,class,building_id` for every assigned slot.
pub fn write_trajectories_csv<W: Write>(trajectories: &[PersonTrajectory], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["person_id", "t", "class", "building_id"])?;
    for p in trajectories {
        for (t, step) in p.steps.iter().enumerate() {
            if let Some(a) = step {
                w.write_record([p.person_id.as_str(), &t.to_string(), a.class.label(), &a.building_id])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<trajectory sink>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::GpsFix;
    use crate::mapping::{Allocation, BuildingType, Construction, EnergyStructure, Environment, Glazing};
    use crate::markov::one_hot;

    fn building(id: &str, btype: BuildingType, x: f64, y: f64) -> Building {
        let allocation = match btype {
            BuildingType::Residential => Allocation::Residential {
                bedrooms: 2,
                vacancy_rate: 0.0,
            },
            BuildingType::Business => Allocation::Business {
                gross_floor_area: 500.0,
                worker_density: 0.05,
            },
            _ => Allocation::Capacity { capacity: 50.0 },
        };
        Building {
            building_id: id.into(),
            btype,
            centroid: Point::new(x, y),
            zone_id: "z".into(),
            allocation,
            environment: Environment {
                year_built: 2000,
                floor_area_m2: 100.0,
                construction: Construction::Masonry,
                glazing: Glazing::Double,
                energy_structure: EnergyStructure::Mixed,
            },
        }
    }

    fn path(fixes: &[(f64, f64, f64)]) -> TimeLocationPath {
        TimeLocationPath {
            person_id: "p".into(),
            points: fixes
                .iter()
                .map(|&(t, x, y)| GpsFix {
                    t_min: t,
                    position: Point::new(x, y),
                })
                .collect(),
        }
    }

    fn mixed_traj() -> TrajectoryMatrix {
        let mut row = [0.0; 8];
        row[ActivityClass::BiologicalNeeds.index()] = 0.5;
        row[ActivityClass::Working.index()] = 0.3;
        row[ActivityClass::PersonalPreference.index()] = 0.2;
        TrajectoryMatrix::new(vec![row; STEPS]).unwrap()
    }

    #[test]
    fn stationary_person_stays_home() {
        let b = [building("home", BuildingType::Residential, 0.0, 0.0)];
        let out = join_gps(
            &[path(&[(0.0, 1.0, 1.0), (600.0, 1.0, 1.0)])],
            &mixed_traj(),
            &b,
            &ActivityPlacementTable::default(),
            100.0,
        )
        .unwrap();
        assert!(out[0].steps.iter().all(|s| s.as_ref().unwrap().building_id == "home"));
        assert!(out[0]
            .steps
            .iter()
            .all(|s| s.as_ref().unwrap().class == ActivityClass::BiologicalNeeds));
    }

    #[test]
    fn equidistant_tie_goes_to_lower_id() {
        let b = [
            building("b2", BuildingType::Residential, 10.0, 0.0),
            building("b1", BuildingType::Residential, -10.0, 0.0),
        ];
        let out = join_gps(
            &[path(&[(0.0, 0.0, 0.0)])],
            &mixed_traj(),
            &b,
            &ActivityPlacementTable::default(),
            100.0,
        )
        .unwrap();
        assert_eq!(out[0].steps[10].as_ref().unwrap().building_id, "b1");
    }

    #[test]
    fn crossing_at_noon_matches_nearest_table() {
        let b = [
            building("home", BuildingType::Residential, 0.0, 0.0),
            building("office", BuildingType::Business, 1000.0, 0.0),
        ];
        let fixes = [(0.0, 5.0, 0.0), (720.0, 995.0, 0.0), (1200.0, 1000.0, 5.0)];
        let out = join_gps(
            &[path(&fixes)],
            &mixed_traj(),
            &b,
            &ActivityPlacementTable::default(),
            100.0,
        )
        .unwrap();
        // hand table: a slot whose midpoint precedes 720 uses the first fix
        for t in 0..STEPS {
            let midpoint = t as f64 * 15.0 + 7.5;
            let expected = if midpoint < 720.0 {
                ("home", ActivityClass::BiologicalNeeds)
            } else {
                ("office", ActivityClass::Working)
            };
            let got = out[0].steps[t].as_ref().unwrap();
            assert_eq!((got.building_id.as_str(), got.class), expected, "slot {t}");
        }
    }

    #[test]
    fn out_of_radius_is_unassigned_and_unhosted_type_uses_argmax() {
        let b = [building("far", BuildingType::Residential, 500.0, 0.0)];
        let out = join_gps(
            &[path(&[(0.0, 0.0, 0.0)])],
            &mixed_traj(),
            &b,
            &ActivityPlacementTable::default(),
            100.0,
        )
        .unwrap();
        assert!(out[0].steps.iter().all(Option::is_none));

        // a table that hosts nothing at residential
        let mut rows: [Vec<(BuildingType, f64)>; 8] = Default::default();
        rows[2] = vec![(BuildingType::Business, 1.0)];
        let table = ActivityPlacementTable::new(rows).unwrap();
        let b = [building("h", BuildingType::Residential, 0.0, 0.0)];
        let traj = TrajectoryMatrix::new(vec![one_hot(ActivityClass::PersonalPreference); STEPS]).unwrap();
        let out = join_gps(&[path(&[(0.0, 0.0, 0.0)])], &traj, &b, &table, 100.0).unwrap();
        assert_eq!(
            out[0].steps[0].as_ref().unwrap().class,
            ActivityClass::PersonalPreference
        );
    }

    #[test]
    fn empty_inputs_rejected() {
        let b = [building("h", BuildingType::Residential, 0.0, 0.0)];
        assert!(join_gps(&[], &mixed_traj(), &b, &ActivityPlacementTable::default(), 100.0).is_err());
        assert!(join_gps(
            &[path(&[(0.0, 0.0, 0.0)])],
            &mixed_traj(),
            &[],
            &ActivityPlacementTable::default(),
            100.0
        )
        .is_err());
    }
}

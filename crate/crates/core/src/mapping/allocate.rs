use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activity::{ActivityClass, NUM_CLASSES, STEPS};
use crate::error::{Error, Result};
use crate::ingest::ZoneDemographics;
use crate::mapping::{ActivityPlacementTable, Allocation, Building, BuildingType, OccupancyField, SchoolLevel};
use crate::markov::TrajectoryMatrix;

/// Allocation weight of a building within its type:
/// bedrooms × (1 − vacancy) for residential, floor area × worker density for
/// business, capacity for everything else.
pub fn allocation_weight(b: &Building) -> f64 {
    match b.allocation {
        Allocation::Residential { bedrooms, vacancy_rate } => bedrooms as f64 * (1.0 - vacancy_rate),
        Allocation::Business {
            gross_floor_area,
            worker_density,
        } => gross_floor_area * worker_density,
        Allocation::Capacity { capacity } | Allocation::Education { capacity, .. } => capacity,
    }
}

/// How mass is spread over capacity-typed buildings before capping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacitySplit {
    /// Equal share per building (the "number of buildings" standard), with
    /// capacity acting only as the cap.
    #[default]
    Equal,
    /// Proportional to capacity.
    Proportional,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocationOptions {
    pub capacity_split: CapacitySplit,
}

/// Buildings sharing one allocation, in building-id order.
#[derive(Debug, Clone, Default)]
struct Pool {
    members: Vec<usize>,
    weights: Vec<f64>,
    caps: Vec<Option<f64>>,
}

impl Pool {
    fn push(&mut self, index: usize, b: &Building, split: CapacitySplit) {
        let weight = match (b.capacity(), split) {
            (Some(_), CapacitySplit::Equal) => 1.0,
            _ => allocation_weight(b),
        };
        self.members.push(index);
        self.weights.push(weight);
        self.caps.push(b.capacity());
    }
}

/// Spreads `mass` over a pool proportionally to weight, caps each member at
/// its capacity and hands overflow to members with headroom in proportion to
/// that headroom, repeating until nothing overflows. Returns per-member
/// amounts and the residual that did not fit anywhere.
fn water_fill(mass: f64, weights: &[f64], caps: &[Option<f64>]) -> (Vec<f64>, f64) {
    let n = weights.len();
    let mut x = vec![0.0; n];
    if mass <= 0.0 {
        return (x, 0.0);
    }
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return (x, mass);
    }
    for i in 0..n {
        x[i] = mass * weights[i] / wsum;
    }
    let mut full = vec![false; n];
    let mut residual = 0.0;
    loop {
        let mut overflow = 0.0;
        for i in 0..n {
            if let Some(cap) = caps[i] {
                if x[i] >= cap && !full[i] {
                    full[i] = true;
                }
                if x[i] > cap {
                    overflow += x[i] - cap;
                    x[i] = cap;
                }
            }
        }
        if overflow <= 0.0 {
            break;
        }
        let open_weight: f64 = (0..n).filter(|&i| caps[i].is_none()).map(|i| weights[i]).sum();
        if open_weight > 0.0 {
            for i in (0..n).filter(|&i| caps[i].is_none()) {
                x[i] += overflow * weights[i] / open_weight;
            }
            break;
        }
        let headroom: Vec<f64> = (0..n)
            .map(|i| match caps[i] {
                Some(cap) if !full[i] => (cap - x[i]).max(0.0),
                _ => 0.0,
            })
            .collect();
        let total_headroom: f64 = headroom.iter().sum();
        if total_headroom <= 0.0 {
            residual += overflow;
            break;
        }
        if overflow >= total_headroom {
            for i in 0..n {
                if let Some(cap) = caps[i] {
                    x[i] = cap;
                    full[i] = true;
                }
            }
            residual += overflow - total_headroom;
            break;
        }
        for i in 0..n {
            x[i] += overflow * headroom[i] / total_headroom;
        }
    }
    (x, residual)
}

/// Community-level school shares: population-weighted mean of the zone
/// `share_school_*` columns.
fn community_school_shares(demo: &[ZoneDemographics]) -> [f64; 4] {
    let total_pop: f64 = demo.iter().map(|z| z.population as f64).sum();
    let mut shares = [0.0; 4];
    for z in demo {
        let w = if total_pop > 0.0 {
            z.population as f64 / total_pop
        } else {
            1.0 / demo.len() as f64
        };
        for (s, v) in shares.iter_mut().zip(z.school_shares()) {
            *s += w * v;
        }
    }
    shares
}

/// Places `N · traj[t][a]` people of each class onto buildings at every step.
///
/// Class mass is split across building types by the placement table. Within a
/// type, mass goes to buildings by allocation weight (or equally, for
/// capacity-typed buildings under [`CapacitySplit::Equal`]) and is
/// water-filled against capacities. Education mass is first split across
/// school levels using the population-weighted zone school shares (restricted
/// to levels that have buildings; weight-proportional over all schools when
/// no shares are given). Buildings are processed in id order so the result
/// does not depend on input order.
pub fn allocate(
    traj: &TrajectoryMatrix,
    population: f64,
    buildings: &[Building],
    table: &ActivityPlacementTable,
    demo: &[ZoneDemographics],
    options: &AllocationOptions,
) -> Result<OccupancyField> {
    if !(population.is_finite() && population >= 0.0) {
        return Err(Error::invalid("allocate", "population must be finite and non-negative"));
    }
    let mut order: Vec<usize> = (0..buildings.len()).collect();
    order.sort_by(|&a, &b| buildings[a].building_id.cmp(&buildings[b].building_id));

    for class in ActivityClass::ALL {
        for &(btype, share) in table.row(class) {
            if share <= 0.0 {
                continue;
            }
            let weight: f64 = buildings
                .iter()
                .filter(|b| b.btype == btype)
                .map(allocation_weight)
                .sum();
            if weight <= 0.0 {
                return Err(Error::NoPlacementTarget { class, btype });
            }
        }
    }

    let mut type_pools: Vec<Pool> = vec![Pool::default(); BuildingType::ALL.len()];
    let mut level_pools: Vec<Pool> = vec![Pool::default(); SchoolLevel::ALL.len()];
    for &i in &order {
        let b = &buildings[i];
        type_pools[b.btype as usize].push(i, b, options.capacity_split);
        if let Some(level) = b.school_level() {
            if allocation_weight(b) > 0.0 {
                level_pools[level as usize].push(i, b, options.capacity_split);
            }
        }
    }

    let raw_levels = community_school_shares(demo);
    let level_total: f64 = (0..4)
        .filter(|&l| !level_pools[l].members.is_empty())
        .map(|l| raw_levels[l])
        .sum();
    let level_shares: Option<[f64; 4]> = (level_total > 0.0).then(|| {
        let mut s = [0.0; 4];
        for l in 0..4 {
            if !level_pools[l].members.is_empty() {
                s[l] = raw_levels[l] / level_total;
            }
        }
        s
    });

    let ids: Vec<String> = buildings.iter().map(|b| b.building_id.clone()).collect();
    let mut field = OccupancyField::zeroed(ids, population);
    let width = buildings.len() * NUM_CLASSES;
    if width == 0 {
        for t in 0..STEPS {
            let (travel, overflow) = unplaced_without_buildings(traj, population, table, t);
            field.set_unplaced(t, travel, overflow);
        }
        return Ok(field);
    }

    let unplaced: Vec<([f64; NUM_CLASSES], [f64; NUM_CLASSES])> = field
        .counts_mut()
        .par_chunks_mut(width)
        .enumerate()
        .map(|(t, cells)| {
            let mut travel = [0.0; NUM_CLASSES];
            let mut overflow = [0.0; NUM_CLASSES];
            let class_mass: Vec<f64> = traj.row(t).iter().map(|p| population * p).collect();
            for class in ActivityClass::ALL {
                if table.is_unplaced(class) {
                    travel[class.index()] = class_mass[class.index()];
                }
            }
            for btype in BuildingType::ALL {
                let incoming: Vec<f64> = ActivityClass::ALL
                    .iter()
                    .map(|&c| class_mass[c.index()] * table.share(c, btype))
                    .collect();
                let total: f64 = incoming.iter().sum();
                if total <= 0.0 {
                    continue;
                }
                let mut place = |pool: &Pool, mass: f64| {
                    let (x, residual) = water_fill(mass, &pool.weights, &pool.caps);
                    for (&b, amount) in pool.members.iter().zip(&x) {
                        let cell = &mut cells[b * NUM_CLASSES..(b + 1) * NUM_CLASSES];
                        for k in 0..NUM_CLASSES {
                            cell[k] += amount * incoming[k] / total;
                        }
                    }
                    for k in 0..NUM_CLASSES {
                        overflow[k] += residual * incoming[k] / total;
                    }
                };
                match (btype, level_shares) {
                    (BuildingType::Education, Some(shares)) => {
                        for (pool, share) in level_pools.iter().zip(shares) {
                            if share > 0.0 {
                                place(pool, total * share);
                            }
                        }
                    }
                    _ => place(&type_pools[btype as usize], total),
                }
            }
            (travel, overflow)
        })
        .collect();
    for (t, (travel, overflow)) in unplaced.into_iter().enumerate() {
        field.set_unplaced(t, travel, overflow);
    }
    Ok(field)
}

fn unplaced_without_buildings(
    traj: &TrajectoryMatrix,
    population: f64,
    table: &ActivityPlacementTable,
    t: usize,
) -> ([f64; NUM_CLASSES], [f64; NUM_CLASSES]) {
    let mut travel = [0.0; NUM_CLASSES];
    let mut overflow = [0.0; NUM_CLASSES];
    for c in ActivityClass::ALL {
        let m = population * traj.get(t, c);
        if table.is_unplaced(c) {
            travel[c.index()] = m;
        } else {
            overflow[c.index()] = m;
        }
    }
    (travel, overflow)
}

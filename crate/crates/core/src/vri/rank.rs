use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GridSpec, RawLayer, Timestep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    Demographic,
    Activity,
    BuildingEnv,
}

impl Aspect {
    pub const ALL: [Aspect; 3] = [Aspect::Demographic, Aspect::Activity, Aspect::BuildingEnv];

    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Demographic => "demographic",
            Aspect::Activity => "activity",
            Aspect::BuildingEnv => "building_env",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_static(self) -> bool {
        self != Aspect::Activity
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aspect {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Aspect::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| {
            Error::InvalidLayer(format!(
                "unknown aspect `{s}` (expected demographic, activity or building_env)"
            ))
        })
    }
}

/// Quintile ranks 1 to 5 (or nodata) for one aspect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AspectLayer {
    pub grid: GridSpec,
    pub ranks: Vec<Option<u8>>,
    pub aspect: Aspect,
    pub timestep: Timestep,
}

impl AspectLayer {
    pub fn new(grid: GridSpec, ranks: Vec<Option<u8>>, aspect: Aspect, timestep: Timestep) -> Result<Self> {
        grid.validate()?;
        if ranks.len() != grid.len() {
            return Err(Error::InvalidLayer(format!(
                "{} ranks for a grid of {} cells",
                ranks.len(),
                grid.len()
            )));
        }
        if let Some(r) = ranks.iter().flatten().find(|r| !(1..=5).contains(*r)) {
            return Err(Error::InvalidLayer(format!("rank {r} outside 1..=5")));
        }
        match (aspect.is_static(), timestep) {
            (true, Timestep::Static) => {}
            (false, Timestep::Step(t)) if t < crate::activity::STEPS => {}
            _ => {
                return Err(Error::InvalidLayer(format!(
                    "{aspect} layer cannot have timestep {timestep}"
                )))
            }
        }
        Ok(Self {
            grid,
            ranks,
            aspect,
            timestep,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> Option<u8> {
        self.ranks[self.grid.index(row, col)]
    }
}

/// Quintile rank of every non-nodata value.
///
/// Values are sorted ascending and position `i` (1-based) falls in the
/// smallest bucket `k` with `i ≤ ⌈k·n/5⌉`. A group of equal values takes the
/// bucket of its first position, so ties never straddle a boundary.
pub fn quintile_ranks(values: &[Option<f64>]) -> Result<Vec<Option<u8>>> {
    let mut order: Vec<(f64, usize)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (v, i)))
        .collect();
    if order.is_empty() {
        return Err(Error::NoData("cannot rank a layer with no data cells".into()));
    }
    if order.iter().any(|(v, _)| !v.is_finite()) {
        return Err(Error::InvalidLayer("raw values must be finite".into()));
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = order.len();
    let bucket_of = |pos: usize| -> u8 { (1..=5u8).find(|&k| pos <= (k as usize * n).div_ceil(5)).unwrap_or(5) };

    let mut ranks = vec![None; values.len()];
    let mut start = 0;
    while start < n {
        let v = order[start].0;
        let rank = bucket_of(start + 1);
        let mut end = start;
        while end < n && order[end].0 == v {
            ranks[order[end].1] = Some(rank);
            end += 1;
        }
        start = end;
    }
    Ok(ranks)
}

pub fn rank_quintiles(raw: &RawLayer, aspect: Aspect, timestep: Timestep) -> Result<AspectLayer> {
    AspectLayer::new(raw.grid, quintile_ranks(&raw.values)?, aspect, timestep)
}

/// Ranks activity layers for steps `0..raws.len()` against one pooled
/// reference, so a rank means the same thing at every step.
pub fn rank_quintiles_pooled(raws: &[RawLayer]) -> Result<Vec<AspectLayer>> {
    let Some(first) = raws.first() else {
        return Ok(Vec::new());
    };
    for r in raws {
        first.grid.ensure_same(&r.grid)?;
    }
    let pooled: Vec<Option<f64>> = raws.iter().flat_map(|r| r.values.iter().copied()).collect();
    let ranks = quintile_ranks(&pooled)?;
    ranks
        .chunks(first.grid.len())
        .enumerate()
        .map(|(t, chunk)| AspectLayer::new(first.grid, chunk.to_vec(), Aspect::Activity, Timestep::Step(t)))
        .collect()
}

/// Per-step ranking: each step is cut against its own cells. Steps with no
/// data cells come out all nodata.
pub fn rank_quintiles_per_step(raws: &[RawLayer]) -> Result<Vec<AspectLayer>> {
    raws.iter()
        .enumerate()
        .map(|(t, raw)| {
            let ranks = if raw.data_count() == 0 {
                vec![None; raw.grid.len()]
            } else {
                quintile_ranks(&raw.values)?
            };
            AspectLayer::new(raw.grid, ranks, Aspect::Activity, Timestep::Step(t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranks(values: &[f64]) -> Vec<u8> {
        let v: Vec<_> = values.iter().map(|x| Some(*x)).collect();
        quintile_ranks(&v).unwrap().into_iter().map(Option::unwrap).collect()
    }

    #[test]
    fn five_distinct_values() {
        assert_eq!(ranks(&[3.0, 1.0, 5.0, 2.0, 4.0]), vec![3, 1, 5, 2, 4]);
    }

    #[test]
    fn total_tie_is_rank_one() {
        assert_eq!(ranks(&[7.0; 9]), vec![1; 9]);
    }

    #[test]
    fn ties_move_boundary_down() {
        // n = 10, cuts at 2,4,6,8,10; the tie at positions 2..=3 takes bucket 1
        let r = ranks(&[1.0, 2.0, 2.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        assert_eq!(r, vec![1, 1, 1, 2, 3, 3, 4, 4, 5, 5]);
    }

    #[test]
    fn nodata_passes_through_and_all_nodata_errors() {
        let r = quintile_ranks(&[None, Some(1.0), None]).unwrap();
        assert_eq!(r, vec![None, Some(1), None]);
        assert!(quintile_ranks(&[None, None]).is_err());
    }

    #[test]
    fn layer_invariants() {
        let g = GridSpec::new(0.0, 0.0, 1.0, 1, 2).unwrap();
        assert!(AspectLayer::new(g, vec![Some(1), Some(6)], Aspect::Demographic, Timestep::Static).is_err());
        assert!(AspectLayer::new(g, vec![Some(1), None], Aspect::Activity, Timestep::Static).is_err());
        assert!(AspectLayer::new(g, vec![Some(1), None], Aspect::BuildingEnv, Timestep::Step(3)).is_err());
        assert!(AspectLayer::new(g, vec![Some(1), None], Aspect::Activity, Timestep::Step(95)).is_ok());
    }

    #[test]
    fn pooled_ranks_are_comparable_across_steps() {
        let g = GridSpec::new(0.0, 0.0, 1.0, 1, 5).unwrap();
        let low = RawLayer::new(g, (0..5).map(|i| Some(i as f64)).collect()).unwrap();
        let high = RawLayer::new(g, (0..5).map(|i| Some(100.0 + i as f64)).collect()).unwrap();
        let pooled = rank_quintiles_pooled(&[low.clone(), high.clone()]).unwrap();
        assert!(pooled[0].ranks.iter().all(|r| r.unwrap() <= 3));
        assert!(pooled[1].ranks.iter().all(|r| r.unwrap() >= 3));
        let per = rank_quintiles_per_step(&[low, high]).unwrap();
        assert_eq!(per[0].ranks, per[1].ranks);
        assert_eq!(per[1].timestep, Timestep::Step(1));
    }
}

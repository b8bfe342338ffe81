use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::{GridSpec, Timestep};
use crate::vri::{AspectLayer, VRIWeights};

/// Per-cell `V = Σ pᵢqᵢ`, nodata wherever a positively weighted aspect
/// rank is missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VulnerabilityMap {
    pub grid: GridSpec,
    pub values: Vec<Option<f64>>,
    pub timestep: Timestep,
    pub weights: VRIWeights,
}

impl VulnerabilityMap {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[self.grid.index(row, col)]
    }

    /// Mean V over cells with data, or `None` if there are none.
    pub fn mean(&self) -> Option<f64> {
        let (sum, n) = self
            .values
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

/// Composes three aspect layers, one per aspect in any order.
pub fn compose(layers: [&AspectLayer; 3], weights: &VRIWeights) -> Result<VulnerabilityMap> {
    let mut by_aspect: [Option<&AspectLayer>; 3] = [None; 3];
    for layer in layers {
        let slot = &mut by_aspect[layer.aspect.index()];
        if slot.is_some() {
            return Err(Error::InvalidLayer(format!(
                "two {} layers given to compose",
                layer.aspect
            )));
        }
        *slot = Some(layer);
    }
    let [Some(d), Some(a), Some(b)] = by_aspect else {
        unreachable!("three distinct aspects fill all three slots")
    };
    d.grid.ensure_same(&a.grid)?;
    d.grid.ensure_same(&b.grid)?;

    let q = weights.as_array();
    let values = (0..d.grid.len())
        .map(|i| {
            let p = [d.ranks[i], a.ranks[i], b.ranks[i]];
            // a zero-weight aspect contributes nothing, so its nodata is ignored
            let mut full = [1u8; 3];
            for k in 0..3 {
                match p[k] {
                    Some(r) => full[k] = r,
                    None if q[k] > 0.0 => return None,
                    None => {}
                }
            }
            Some(weighted_rank(full, q))
        })
        .collect();
    Ok(VulnerabilityMap {
        grid: d.grid,
        values,
        timestep: a.timestep,
        weights: *weights,
    })
}

/// `Σ pᵢqᵢ`, held inside the span of the positively weighted ranks so
/// rounding in a weight sum near one cannot push V outside it.
pub fn weighted_rank(p: [u8; 3], q: [f64; 3]) -> f64 {
    let v: f64 = p.iter().zip(q).map(|(p, q)| f64::from(*p) * q).sum();
    let used = || p.iter().zip(q).filter(|(_, q)| *q > 0.0).map(|(p, _)| f64::from(*p));
    let lo = used().fold(f64::INFINITY, f64::min);
    let hi = used().fold(f64::NEG_INFINITY, f64::max);
    if lo > hi {
        return v;
    }
    v.clamp(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vri::Aspect;

    fn layer(ranks: &[u8], aspect: Aspect) -> AspectLayer {
        let g = GridSpec::new(0.0, 0.0, 1.0, 1, ranks.len()).unwrap();
        let t = if aspect.is_static() {
            Timestep::Static
        } else {
            Timestep::Step(0)
        };
        AspectLayer::new(g, ranks.iter().map(|r| Some(*r)).collect(), aspect, t).unwrap()
    }

    #[test]
    fn hand_case() {
        let v = weighted_rank([2, 4, 3], [0.5, 0.3, 0.2]);
        assert!((v - 2.8).abs() < 1e-12);
    }

    #[test]
    fn degenerate_weights_and_any_order() {
        let d = layer(&[1, 2, 5], Aspect::Demographic);
        let a = layer(&[3, 3, 3], Aspect::Activity);
        let b = layer(&[4, 1, 2], Aspect::BuildingEnv);
        let w = VRIWeights::new(1.0, 0.0, 0.0).unwrap();
        let m = compose([&b, &d, &a], &w).unwrap();
        assert_eq!(m.values, vec![Some(1.0), Some(2.0), Some(5.0)]);
        assert_eq!(m.timestep, Timestep::Step(0));
    }

    #[test]
    fn nodata_and_errors() {
        let g = GridSpec::new(0.0, 0.0, 1.0, 1, 2).unwrap();
        let d = AspectLayer::new(g, vec![Some(2), None], Aspect::Demographic, Timestep::Static).unwrap();
        let a = layer(&[3, 3], Aspect::Activity);
        let b = layer(&[4, 4], Aspect::BuildingEnv);
        let m = compose([&d, &a, &b], &VRIWeights::default()).unwrap();
        assert!(m.values[0].is_some() && m.values[1].is_none());
        let w = VRIWeights::new(0.0, 0.5, 0.5).unwrap();
        let m = compose([&d, &a, &b], &w).unwrap();
        assert_eq!(m.values, [Some(3.5), Some(3.5)]);
        assert!(compose([&d, &d, &b], &VRIWeights::default()).is_err());
        let wide = layer(&[1, 1, 1], Aspect::BuildingEnv);
        let err = compose([&d, &a, &wide], &VRIWeights::default()).unwrap_err();
        assert!(matches!(err, Error::GridMismatch { .. }));
    }
}

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::{render, Timestep};
use crate::vri::{compose, AspectLayer, VRIWeights, VulnerabilityMap};

/// Composes one map per requested step. The static layers are shared by
/// every frame; `activity` is looked up by timestep.
pub fn temporal_sweep(
    demographic: &AspectLayer,
    activity: &[AspectLayer],
    building_env: &AspectLayer,
    weights: &VRIWeights,
    steps: &[usize],
) -> Result<Vec<VulnerabilityMap>> {
    let layers: Vec<&AspectLayer> = steps
        .iter()
        .map(|&t| {
            activity
                .iter()
                .find(|l| l.timestep == Timestep::Step(t))
                .ok_or(Error::MissingStep(t))
        })
        .collect::<Result<_>>()?;
    layers
        .par_iter()
        .map(|a| compose([demographic, a, building_env], weights))
        .collect()
}

/// PNG bytes for each map, rendered in parallel, in input order.
pub fn render_frames(maps: &[VulnerabilityMap], ramp_id: &str, cell_px: u32) -> Result<Vec<Vec<u8>>> {
    maps.par_iter().map(|m| render(m, ramp_id, cell_px)?.to_png()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GridSpec;
    use crate::vri::Aspect;

    fn layers() -> (AspectLayer, Vec<AspectLayer>, AspectLayer) {
        let g = GridSpec::new(0.0, 0.0, 1.0, 1, 3).unwrap();
        let d = AspectLayer::new(
            g,
            vec![Some(1), Some(3), Some(5)],
            Aspect::Demographic,
            Timestep::Static,
        )
        .unwrap();
        let b = AspectLayer::new(g, vec![Some(2), Some(2), None], Aspect::BuildingEnv, Timestep::Static).unwrap();
        let acts = (0..3)
            .map(|t| {
                let r = if t == 2 { 5 } else { 1 };
                AspectLayer::new(g, vec![Some(r); 3], Aspect::Activity, Timestep::Step(t)).unwrap()
            })
            .collect();
        (d, acts, b)
    }

    #[test]
    fn single_step_equals_compose() {
        let (d, a, b) = layers();
        let w = VRIWeights::default();
        let frames = temporal_sweep(&d, &a, &b, &w, &[2]).unwrap();
        assert_eq!(frames, vec![compose([&d, &a[2], &b], &w).unwrap()]);
    }

    #[test]
    fn identical_activity_gives_identical_frames() {
        let (d, a, b) = layers();
        let frames = temporal_sweep(&d, &a, &b, &VRIWeights::default(), &[0, 1]).unwrap();
        assert_eq!(frames[0].values, frames[1].values);
        assert_eq!(frames[1].timestep, Timestep::Step(1));
    }

    #[test]
    fn missing_step_is_named() {
        let (d, a, b) = layers();
        let err = temporal_sweep(&d, &a, &b, &VRIWeights::default(), &[0, 50]).unwrap_err();
        assert!(err.to_string().contains("50"));
    }

    #[test]
    fn frames_render_in_order() {
        let (d, a, b) = layers();
        let maps = temporal_sweep(&d, &a, &b, &VRIWeights::default(), &[0, 2]).unwrap();
        let pngs = render_frames(&maps, "ylorrd", 2).unwrap();
        assert_eq!(pngs.len(), 2);
        assert_ne!(pngs[0], pngs[1]);
        assert!(render_frames(&maps, "nope", 2).is_err());
    }
}

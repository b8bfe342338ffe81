use cvri::activity::{NUM_CLASSES, STEPS};
use cvri::geo::{rasterize, GridSpec, Reducer, Timestep};
use cvri::markov::{propagate, MarkovActivityModel, TransitionMatrix};
use cvri::vri::{compose, quintile_ranks, weighted_rank, Aspect, AspectLayer, VRIWeights};
use proptest::prelude::*;

fn distribution() -> impl Strategy<Value = [f64; NUM_CLASSES]> {
    prop::array::uniform8(0.01f64..1.0).prop_map(|r| {
        let s: f64 = r.iter().sum();
        r.map(|v| v / s)
    })
}

fn brute_rank(values: &[f64], i: usize) -> u8 {
    // `first` is the 1-based sorted position of the first value equal to values[i];
    // first <= ceil(k n / 5)  <=>  5 (first - 1) < k n
    let first = values.iter().filter(|v| **v < values[i]).count() + 1;
    let n = values.len();
    (1..=5u8).find(|k| 5 * (first - 1) < usize::from(*k) * n).unwrap()
}

proptest! {
    #[test]
    fn quintile_ranks_match_brute_force(values in prop::collection::vec(-100.0f64..100.0, 1..60)) {
        let ranks = quintile_ranks(&values.iter().copied().map(Some).collect::<Vec<_>>()).unwrap();
        for i in 0..values.len() {
            prop_assert_eq!(ranks[i], Some(brute_rank(&values, i)));
        }
    }

    #[test]
    fn quintile_ranks_are_monotone_and_skip_nodata(
        values in prop::collection::vec(prop::option::weighted(0.8, 0.0f64..10.0), 1..80)
    ) {
        prop_assume!(values.iter().any(Option::is_some));
        let ranks = quintile_ranks(&values).unwrap();
        for (v, r) in values.iter().zip(&ranks) {
            prop_assert_eq!(v.is_none(), r.is_none());
        }
        for i in 0..values.len() {
            for j in 0..values.len() {
                if let (Some(a), Some(b)) = (values[i], values[j]) {
                    if a < b {
                        prop_assert!(ranks[i] <= ranks[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn quintile_ranks_invariant_under_increasing_maps(values in prop::collection::vec(0.001f64..10.0, 1..60)) {
        let a = quintile_ranks(&values.iter().map(|v| Some(*v)).collect::<Vec<_>>()).unwrap();
        let b = quintile_ranks(&values.iter().map(|v| Some(v.ln() * 3.0 + 1.0)).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rasterize_sum_conserves_in_bounds_mass(
        points in prop::collection::vec((-50.0f64..550.0, -50.0f64..550.0, 0.0f64..100.0), 0..200)
    ) {
        let grid = GridSpec::new(0.0, 0.0, 50.0, 10, 10).unwrap();
        let (layer, report) = rasterize(&points, &grid, Reducer::Sum).unwrap();
        let inside: Vec<_> = points.iter().filter(|(x, y, _)| (0.0..500.0).contains(x) && (0.0..500.0).contains(y)).collect();
        let expected: f64 = inside.iter().map(|p| p.2).sum();
        let got: f64 = layer.values.iter().flatten().sum();
        prop_assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
        prop_assert_eq!(report.binned, inside.len());
        prop_assert_eq!(report.out_of_bounds, points.len() - inside.len());
    }

    #[test]
    fn compose_stays_within_rank_span(
        cells in prop::collection::vec((1u8..=5, 1u8..=5, 1u8..=5), 1..30),
        raw in (0.0f64..1.0, 0.0f64..1.0, 0.01f64..1.0),
    ) {
        let grid = GridSpec::new(0.0, 0.0, 1.0, 1, cells.len()).unwrap();
        let layer = |f: fn(&(u8, u8, u8)) -> u8, aspect: Aspect, ts| {
            AspectLayer::new(grid, cells.iter().map(|c| Some(f(c))).collect(), aspect, ts).unwrap()
        };
        let d = layer(|c| c.0, Aspect::Demographic, Timestep::Static);
        let a = layer(|c| c.1, Aspect::Activity, Timestep::Step(3));
        let b = layer(|c| c.2, Aspect::BuildingEnv, Timestep::Static);
        let w = VRIWeights::normalized(raw.0, raw.1, raw.2).unwrap();
        let map = compose([&b, &d, &a], &w).unwrap();
        for (c, v) in cells.iter().zip(&map.values) {
            let v = v.unwrap();
            let lo = f64::from(c.0.min(c.1).min(c.2));
            let hi = f64::from(c.0.max(c.1).max(c.2));
            prop_assert!(lo <= v && v <= hi);
            let direct = w.demographic() * f64::from(c.0) + w.activity() * f64::from(c.1) + w.building_env() * f64::from(c.2);
            prop_assert!((v - direct).abs() < 1e-12);
            prop_assert_eq!(v, weighted_rank([c.0, c.1, c.2], w.as_array()));
        }
    }

    #[test]
    fn propagate_rows_stay_distributions(alpha in distribution(), rows in prop::array::uniform8(distribution())) {
        let m: TransitionMatrix = rows;
        let traj = propagate(&MarkovActivityModel::stationary(alpha, m).unwrap());
        prop_assert_eq!(traj.rows().len(), STEPS);
        for row in traj.rows() {
            prop_assert!(row.iter().all(|v| *v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

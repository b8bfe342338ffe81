//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body};
use axum::http::Request;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

use cvri::activity::{ActivityClass, NUM_CLASSES, STEPS};
use cvri::geo::{read_values_csv, GridSpec, Point, RawLayer, Timestep};
use cvri::ingest::{DiaryRecord, ZoneDemographics};
use cvri::mapping::{
    allocate, ActivityPlacementTable, Allocation, AllocationOptions, Building, BuildingType, CapacitySplit,
    Construction, EnergyStructure, Environment, Glazing, SchoolLevel,
};
use cvri::markov::{
    aggregate, fit, normalize_occurrence, propagate, sample, ActivitySequence, FitOptions, MarkovActivityModel,
    ModelProvenance, OccurrenceMatrix, TransitionMatrix,
};
use cvri::pipeline::{load_diaries, run_pipeline, OutputLayout, ProjectConfig, ScenarioSnapshot, Stage};
use cvri::synth::bundled_dir;
use cvri::vri::{compose, quintile_ranks, rank_quintiles, Aspect, AspectLayer, VRIWeights};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn bundled_config() -> ProjectConfig {
    ProjectConfig::load(bundled_dir().join("config.toml")).expect("bundled config loads")
}

/// Rows drawn uniformly from the simplex.
fn random_distribution(rng: &mut ChaCha8Rng) -> [f64; NUM_CLASSES] {
    let mut row = [0.0; NUM_CLASSES];
    for v in row.iter_mut() {
        *v = -(1.0 - rng.gen::<f64>()).ln();
    }
    let s: f64 = row.iter().sum();
    row.map(|v| v / s)
}

fn random_model(rng: &mut ChaCha8Rng, concentration: usize) -> MarkovActivityModel {
    // sum of `concentration` simplex draws flattens the rows
    let dist = |rng: &mut ChaCha8Rng| {
        let mut acc = [0.0; NUM_CLASSES];
        for _ in 0..concentration {
            for (a, v) in acc.iter_mut().zip(random_distribution(rng)) {
                *a += v / concentration as f64;
            }
        }
        acc
    };
    let alpha = dist(rng);
    let xi: Vec<TransitionMatrix> = (0..STEPS - 1)
        .map(|_| {
            let mut m = [[0.0; NUM_CLASSES]; NUM_CLASSES];
            for row in m.iter_mut() {
                *row = dist(rng);
            }
            m
        })
        .collect();
    MarkovActivityModel::new(alpha, xi, ModelProvenance::default()).unwrap()
}

fn c1_occurrence_worked_example() -> Outcome {
    let occ = OccurrenceMatrix::from_rows(&[vec![0.1, 0.3, 0.5]]).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let n = normalize_occurrence(&occ).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected = [0.1111111111111111, 0.3333333333333333, 0.5555555555555556];
    let err = n
        .row(0)
        .iter()
        .zip(expected)
        .map(|(a, e)| (a - e).abs())
        .fold(0.0, f64::max);
    let printed: Vec<String> = n.row(0).iter().map(|v| format!("{v:.2}")).collect();
    check(
        err <= 1e-9 && printed == ["0.11", "0.33", "0.56"] && elapsed < Duration::from_millis(1),
        format!("{printed:?}, max err {err:.1e}, {elapsed:?}"),
        format!("got {:?} ({printed:?}), err {err:.1e}, {elapsed:?}", n.row(0)),
    )
}

fn c2_chain_oracle() -> Outcome {
    let mut alpha = [0.0; NUM_CLASSES];
    alpha[0] = 1.0;
    let mut m = [[0.0; NUM_CLASSES]; NUM_CLASSES];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m[0][0] = 0.9;
    m[0][1] = 0.1;
    m[1][0] = 0.5;
    m[1][1] = 0.5;
    let traj = propagate(&MarkovActivityModel::stationary(alpha, m).map_err(|e| e.to_string())?);

    // exhaustive enumeration of two-state paths of length t
    let xi2 = [[0.9, 0.1], [0.5, 0.5]];
    let mut worst: f64 = 0.0;
    for t in 0..3 {
        let mut dist = [0.0f64; 2];
        for path in 0..(1u32 << t) {
            let (mut s, mut p) = (0usize, 1.0);
            for k in 0..t {
                let next = ((path >> k) & 1) as usize;
                p *= xi2[s][next];
                s = next;
            }
            dist[s] += p;
        }
        let row = traj.row(t);
        worst = worst.max((row[0] - dist[0]).abs()).max((row[1] - dist[1]).abs());
        worst = worst.max(row[2..].iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    let hand = [[1.0, 0.0], [0.9, 0.1], [0.86, 0.14]];
    for (t, h) in hand.iter().enumerate() {
        worst = worst
            .max((traj.row(t)[0] - h[0]).abs())
            .max((traj.row(t)[1] - h[1]).abs());
    }
    check(
        worst <= 1e-12,
        format!("rows 0..3 match enumeration, max err {worst:.1e}"),
        format!("max err {worst:.1e}; rows {:?}", &traj.rows()[..3]),
    )
}

fn c3_sampler_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = random_model(&mut rng, 1);
    let start = Instant::now();
    let seqs = sample(&model, 100_000, 11);
    let empirical = aggregate(&seqs, None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let dev = empirical.max_abs_diff(&propagate(&model));
    check(
        dev <= 0.01 && elapsed < Duration::from_secs(10),
        format!("max-abs deviation {dev:.4} in {elapsed:.2?}"),
        format!("max-abs deviation {dev:.4} (limit 0.01) in {elapsed:.2?}"),
    )
}

fn sequence_to_diary(i: usize, seq: &ActivitySequence) -> DiaryRecord {
    let mut spans = Vec::new();
    let mut start = 0;
    for t in 1..=STEPS {
        if t == STEPS || seq[t] != seq[start] {
            spans.push(((start * 15) as u32, ((t - start) * 15) as u32, seq[start]));
            start = t;
        }
    }
    DiaryRecord::from_spans(format!("S{i}"), 1.0, &spans, ActivityClass::Others).unwrap()
}

fn c4_model_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let truth = random_model(&mut rng, 1);
    let seqs = sample(&truth, 50_000, 44);
    let diaries: Vec<DiaryRecord> = seqs.iter().enumerate().map(|(i, s)| sequence_to_diary(i, s)).collect();
    let fitted = fit(&diaries, &FitOptions::default()).map_err(|e| e.to_string())?;

    let mut occupancy = vec![[0usize; NUM_CLASSES]; STEPS];
    let mut counts = vec![[[0usize; NUM_CLASSES]; NUM_CLASSES]; STEPS - 1];
    for s in &seqs {
        for (t, c) in s.iter().enumerate() {
            occupancy[t][c.index()] += 1;
            if t + 1 < STEPS {
                counts[t][c.index()][s[t + 1].index()] += 1;
            }
        }
    }
    let (mut worst, mut at, mut checked) = (0.0f64, (0, 0, 0, 0), 0);
    let (mut worst_z, mut mle_gap) = (0.0f64, 0.0f64);
    for t in 0..STEPS - 1 {
        for p in 0..NUM_CLASSES {
            let n = occupancy[t][p];
            if n < 100 {
                continue;
            }
            for q in 0..NUM_CLASSES {
                checked += 1;
                let truth_pq = truth.transition(t)[p][q];
                let fitted_pq = fitted.transition(t)[p][q];
                let e = (fitted_pq - truth_pq).abs();
                if e > worst {
                    worst = e;
                    at = (t, p, q, n);
                }
                // the fit must be exactly the empirical transition frequency
                mle_gap = mle_gap.max((fitted_pq - counts[t][p][q] as f64 / n as f64).abs());
                let se = (truth_pq * (1.0 - truth_pq) / n as f64).sqrt();
                if se > 0.0 {
                    worst_z = worst_z.max(e / se);
                }
            }
        }
    }
    let detail = format!(
        "max error {worst:.4} over {checked} entries (worst xi[{}][{}][{}], occupancy {}); \
         fit vs empirical frequencies {mle_gap:.1e}; max |error|/std.err {worst_z:.2}",
        at.0, at.1, at.2, at.3
    );
    check(worst <= 0.02, detail.clone(), format!("{detail}; limit 0.02"))
}

fn env() -> Environment {
    Environment {
        year_built: 1990,
        floor_area_m2: 100.0,
        construction: Construction::Wood,
        glazing: Glazing::Double,
        energy_structure: EnergyStructure::Mixed,
    }
}

fn random_inventory(rng: &mut ChaCha8Rng) -> Vec<Building> {
    let mut out = Vec::new();
    let mut add = |btype: BuildingType, allocation: Allocation| {
        let n = out.len();
        out.push(Building {
            building_id: format!("b{n:03}"),
            btype,
            centroid: Point::new(0.0, 0.0),
            zone_id: "z".into(),
            allocation,
            environment: env(),
        });
    };
    for btype in BuildingType::ALL {
        for _ in 0..rng.gen_range(1..6) {
            let allocation = match btype {
                BuildingType::Residential => Allocation::Residential {
                    bedrooms: rng.gen_range(1..6),
                    vacancy_rate: rng.gen_range(0.0..0.5),
                },
                BuildingType::Business => Allocation::Business {
                    gross_floor_area: rng.gen_range(100.0..5000.0),
                    worker_density: rng.gen_range(0.001..0.05),
                },
                BuildingType::Education => Allocation::Education {
                    capacity: rng.gen_range(1.0..300.0),
                    school_level: SchoolLevel::ALL[rng.gen_range(0..4)],
                },
                _ => Allocation::Capacity {
                    capacity: rng.gen_range(1.0..300.0),
                },
            };
            add(btype, allocation);
        }
    }
    // shuffle so processing order differs from input order
    for i in (1..out.len()).rev() {
        out.swap(i, rng.gen_range(0..=i));
    }
    out
}

fn c5_allocation_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let table = ActivityPlacementTable::default();
    let (mut worst_mass, mut worst_cap) = (0.0f64, f64::NEG_INFINITY);
    for k in 0..1000 {
        let model = random_model(&mut rng, 1);
        let traj = propagate(&model);
        let buildings = random_inventory(&mut rng);
        let population = rng.gen_range(100.0..20_000.0);
        let mut shares = BTreeMap::new();
        for l in SchoolLevel::ALL {
            shares.insert(format!("share_school_{}", l.as_str()), rng.gen_range(0.0..0.25));
        }
        let demo = [ZoneDemographics {
            zone_id: "z".into(),
            population: 1000,
            shares,
        }];
        let split = if k % 2 == 0 {
            CapacitySplit::Equal
        } else {
            CapacitySplit::Proportional
        };
        let field = allocate(
            &traj,
            population,
            &buildings,
            &table,
            &demo,
            &AllocationOptions { capacity_split: split },
        )
        .map_err(|e| format!("inventory {k}: {e}"))?;
        for t in 0..STEPS {
            let total = field.placed_total(t) + field.unplaced_total(t);
            worst_mass = worst_mass.max((total - population).abs());
            for b in &buildings {
                if let Some(cap) = b.capacity() {
                    let i = field.building_index(&b.building_id).unwrap();
                    worst_cap = worst_cap.max(field.building_total(t, i) - cap);
                }
            }
        }
    }
    check(
        worst_mass <= 1e-6 && worst_cap <= 1e-9,
        format!(
            "1000 inventories: mass err {worst_mass:.1e}, max cap excess {:.1e}",
            worst_cap.max(0.0)
        ),
        format!("mass err {worst_mass:.1e}, cap excess {worst_cap:.1e}"),
    )
}

fn layer(grid: GridSpec, ranks: Vec<u8>, aspect: Aspect) -> AspectLayer {
    let ts = if aspect.is_static() {
        Timestep::Static
    } else {
        Timestep::Step(0)
    };
    AspectLayer::new(grid, ranks.into_iter().map(Some).collect(), aspect, ts).unwrap()
}

fn c6_composition_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = GridSpec::new(0.0, 0.0, 1.0, 4, 5).unwrap();
    let n = grid.len();

    for k in 1..=5u8 {
        let ls = Aspect::ALL.map(|a| layer(grid, vec![k; n], a));
        for _ in 0..20 {
            let w = VRIWeights::normalized(rng.gen(), rng.gen(), rng.gen()).map_err(|e| e.to_string())?;
            let v = compose([&ls[0], &ls[1], &ls[2]], &w).map_err(|e| e.to_string())?;
            if v.values.iter().any(|x| *x != Some(f64::from(k))) {
                return Err(format!("uniform rank {k} gave {:?} for {w:?}", v.values));
            }
        }
    }

    let ls = Aspect::ALL.map(|a| layer(grid, (0..n).map(|_| rng.gen_range(1..=5)).collect(), a));
    for (i, unit) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].iter().enumerate() {
        let w = VRIWeights::new(unit[0], unit[1], unit[2]).map_err(|e| e.to_string())?;
        let v = compose([&ls[0], &ls[1], &ls[2]], &w).map_err(|e| e.to_string())?;
        let expect: Vec<Option<f64>> = ls[i].ranks.iter().map(|r| r.map(f64::from)).collect();
        if v.values != expect {
            return Err(format!(
                "unit weights {unit:?} do not reproduce the {} layer",
                Aspect::ALL[i]
            ));
        }
    }

    let one = GridSpec::new(0.0, 0.0, 1.0, 1, 1).unwrap();
    let hand = compose(
        [
            &layer(one, vec![2], Aspect::Demographic),
            &layer(one, vec![4], Aspect::Activity),
            &layer(one, vec![3], Aspect::BuildingEnv),
        ],
        &VRIWeights::new(0.5, 0.3, 0.2).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let hv = hand.values[0].unwrap();
    if (hv - 2.8).abs() > 1e-12 {
        return Err(format!("hand case gave {hv}"));
    }

    for _ in 0..100 {
        let raw: [f64; 3] = [
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.01..5.0),
        ];
        let c: f64 = rng.gen_range(0.01..100.0);
        let a = compose(
            [&ls[0], &ls[1], &ls[2]],
            &VRIWeights::normalized(raw[0], raw[1], raw[2]).unwrap(),
        )
        .unwrap();
        let b = compose(
            [&ls[0], &ls[1], &ls[2]],
            &VRIWeights::normalized(c * raw[0], c * raw[1], c * raw[2]).unwrap(),
        )
        .unwrap();
        for i in 0..n {
            for j in 0..n {
                let (ai, aj, bi, bj) = (
                    a.values[i].unwrap(),
                    a.values[j].unwrap(),
                    b.values[i].unwrap(),
                    b.values[j].unwrap(),
                );
                if (ai - aj).abs() > 1e-9 && (ai < aj) != (bi < bj) {
                    return Err(format!("ordering of cells {i},{j} changed under scaling by {c}"));
                }
            }
        }
    }
    Ok(format!(
        "uniform ranks, unit weights, hand case V = {hv}, scaling invariance"
    ))
}

fn c7_quintiles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut vals: Vec<f64> = (0..1000).map(|i| i as f64 + rng.gen_range(0.0..0.5)).collect();
    for i in (1..vals.len()).rev() {
        vals.swap(i, rng.gen_range(0..=i));
    }
    let ranks = quintile_ranks(&vals.iter().copied().map(Some).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let mut counts = [0usize; 5];
    for r in ranks.iter().flatten() {
        counts[usize::from(*r) - 1] += 1;
    }
    if counts != [200; 5] {
        return Err(format!("bucket counts {counts:?}"));
    }

    let grid = GridSpec::new(0.0, 0.0, 1.0, 10, 10).unwrap();
    for k in 0..100 {
        let raw: Vec<Option<f64>> = (0..grid.len())
            .map(|_| (rng.gen_range(0..10) > 0).then(|| rng.gen_range(0.001..50.0)))
            .collect();
        let layer = RawLayer::new(grid, raw.clone()).map_err(|e| e.to_string())?;
        let r = rank_quintiles(&layer, Aspect::Demographic, Timestep::Static).map_err(|e| e.to_string())?;
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if let (Some(a), Some(b)) = (raw[i], raw[j]) {
                    if a < b && r.ranks[i] > r.ranks[j] {
                        return Err(format!("layer {k}: monotonicity broken at cells {i},{j}"));
                    }
                }
            }
        }
        let cubed = RawLayer::new(grid, raw.iter().map(|v| v.map(|x| x * x * x)).collect()).unwrap();
        let rc = rank_quintiles(&cubed, Aspect::Demographic, Timestep::Static).unwrap();
        if rc.ranks != r.ranks {
            return Err(format!("layer {k}: ranks changed under x -> x^3"));
        }
    }
    Ok("200 per bucket, monotone and x^3-invariant on 100 layers".into())
}

fn files_under(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn c8_determinism(a: &Path, b: &Path) -> Outcome {
    let config = bundled_config();
    let start = Instant::now();
    run_pipeline(&config, &Stage::ALL, a).map_err(|e| e.to_string())?;
    let first = start.elapsed();
    run_pipeline(&config, &Stage::ALL, b).map_err(|e| e.to_string())?;
    let fa = files_under(a);
    let fb = files_under(b);
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let frames = fa.keys().filter(|k| k.ends_with(".png") && k.contains("vri_t")).count();
    check(
        fa.len() == fb.len() && differing.is_empty() && frames == STEPS && first < Duration::from_secs(60),
        format!(
            "{} files byte-identical across runs, {frames} frames, {first:.2?} per run",
            fa.len()
        ),
        format!(
            "{} vs {} files, differing {differing:?}, {frames} frames, {first:.2?}",
            fa.len(),
            fb.len()
        ),
    )
}

fn c9_diurnal() -> Outcome {
    let config = bundled_config();
    let (diaries, _) = load_diaries(&config).map_err(|e| e.to_string())?;
    let traj = propagate(&fit(&diaries, &config.fit).map_err(|e| e.to_string())?);
    // 00:00 to 04:00 is steps 0..16
    let mut min_margin = f64::INFINITY;
    for t in 0..16 {
        let row = traj.row(t);
        let c02 = row[ActivityClass::BiologicalNeeds.index()];
        let other = row
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ActivityClass::BiologicalNeeds.index())
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        min_margin = min_margin.min(c02 - other);
    }
    check(
        min_margin > 0.0,
        format!("c02 leads every class on steps 0..16, smallest margin {min_margin:.3}"),
        format!("smallest margin {min_margin:.3}"),
    )
}

async fn get_json(router: &axum::Router, uri: &str) -> serde_json::Value {
    let resp = router
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert!(resp.status().is_success(), "{uri}: {}", resp.status());
    serde_json::from_slice(&to_bytes(resp.into_body(), usize::MAX).await.unwrap()).unwrap()
}

fn c10_parity(out: &Path) -> Outcome {
    let config = bundled_config();
    let layout = OutputLayout::new(out);
    let snapshot = Arc::new(ScenarioSnapshot::load(&config, &layout).map_err(|e| e.to_string())?);
    let router = cvri::service::router(snapshot);
    let grid = config.grid;
    let read = |aspect: Aspect, ts: Timestep| -> Vec<Option<f64>> {
        read_values_csv(fs::File::open(layout.layer(aspect, ts)).unwrap(), &grid).unwrap()
    };
    let demo = read(Aspect::Demographic, Timestep::Static);
    let env = read(Aspect::BuildingEnv, Timestep::Static);

    let rt = tokio::runtime::Runtime::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let t = rng.gen_range(0..STEPS);
        let raw: [f64; 3] = [
            rng.gen_range(0.0..10.0),
            rng.gen_range(0.0..10.0),
            rng.gen_range(0.1..10.0),
        ];
        let uri = format!("/vri?t={t}&qd={}&qa={}&qb={}", raw[0], raw[1], raw[2]);
        let body = rt.block_on(get_json(&router, &uri));
        let act = read(Aspect::Activity, Timestep::Step(t));
        let s: f64 = raw.iter().sum();
        let q = raw.map(|v| v / s);
        let values = body["values"].as_array().unwrap();
        for i in 0..grid.len() {
            let expect = match (demo[i], act[i], env[i]) {
                (Some(d), Some(a), Some(b)) => Some(q[0] * d + q[1] * a + q[2] * b),
                _ => None,
            };
            match (values[i].as_f64(), expect) {
                (Some(got), Some(e)) => worst = worst.max((got - e).abs()),
                (None, None) => {}
                (got, e) => return Err(format!("t={t} cell {i}: api {got:?}, offline {e:?}")),
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("10 random (t, q): max diff {worst:.1e}"),
        format!("max diff {worst:.1e}"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let run_a = tmp.path().join("a");
    let run_b = tmp.path().join("b");

    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        (
            "1 occurrence normalization worked example",
            Box::new(c1_occurrence_worked_example),
        ),
        ("2 two-state chain oracle", Box::new(c2_chain_oracle)),
        ("3 sampler vs propagator", Box::new(c3_sampler_agreement)),
        ("4 model recovery", Box::new(c4_model_recovery)),
        ("5 allocation conservation", Box::new(c5_allocation_conservation)),
        ("6 composition suite", Box::new(c6_composition_suite)),
        ("7 quintile properties", Box::new(c7_quintiles)),
        ("8 pipeline determinism", Box::new(|| c8_determinism(&run_a, &run_b))),
        ("9 night-time biological dominance", Box::new(c9_diurnal)),
        ("10 offline/online parity", Box::new(|| c10_parity(&run_a))),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

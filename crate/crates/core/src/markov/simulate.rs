use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::activity::{ActivityClass, NUM_CLASSES, STEPS};
use crate::error::{Error, Result};
use crate::markov::discretize::ActivitySequence;
use crate::markov::model::MarkovActivityModel;
use crate::markov::trajectory::TrajectoryMatrix;

/// Forward propagation of the class distribution: row 0 is `alpha`, row
/// `t + 1` is row `t` times `xi[t]`.
pub fn propagate(model: &MarkovActivityModel) -> TrajectoryMatrix {
    let mut rows = Vec::with_capacity(STEPS);
    let mut current = *model.alpha();
    rows.push(current);
    for m in model.xi() {
        let mut next = [0.0; NUM_CLASSES];
        for (p, &mass) in current.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (q, slot) in next.iter_mut().enumerate() {
                *slot += mass * m[p][q];
            }
        }
        current = next;
        rows.push(current);
    }
    TrajectoryMatrix::from_rows_unchecked(rows)
}

/// Draws `n` day sequences. Sequence `i` uses its own ChaCha stream derived
/// from `(seed, i)`, so the output is independent of thread count.
pub fn sample(model: &MarkovActivityModel, n: usize, seed: u64) -> Vec<ActivitySequence> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            sample_one(model, &mut rng)
        })
        .collect()
}

fn sample_one<R: Rng>(model: &MarkovActivityModel, rng: &mut R) -> ActivitySequence {
    let mut seq = [ActivityClass::Others; STEPS];
    let mut state = draw(model.alpha(), rng);
    seq[0] = ActivityClass::ALL[state];
    for (t, m) in model.xi().iter().enumerate() {
        state = draw(&m[state], rng);
        seq[t + 1] = ActivityClass::ALL[state];
    }
    seq
}

fn draw<R: Rng>(dist: &[f64; NUM_CLASSES], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    // rounding left u just above the cumulative sum
    last_positive
}

/// Weighted fraction of sequences in each class at each step.
pub fn aggregate(sequences: &[ActivitySequence], weights: Option<&[f64]>) -> Result<TrajectoryMatrix> {
    if sequences.is_empty() {
        return Err(Error::NoData("no sequences to aggregate".into()));
    }
    if let Some(w) = weights {
        if w.len() != sequences.len() {
            return Err(Error::invalid("aggregate", "one weight per sequence required"));
        }
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("aggregate", "weights must be finite and non-negative"));
        }
    }
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let total: f64 = (0..sequences.len()).map(weight).sum();
    if total <= 0.0 {
        return Err(Error::ZeroWeights);
    }
    let mut rows = vec![[0.0; NUM_CLASSES]; STEPS];
    for (i, seq) in sequences.iter().enumerate() {
        let w = weight(i);
        for (row, class) in rows.iter_mut().zip(seq) {
            row[class.index()] += w;
        }
    }
    for row in &mut rows {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    Ok(TrajectoryMatrix::from_rows_unchecked(rows))
}

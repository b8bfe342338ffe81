use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::activity::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::ingest::DiaryRecord;
use crate::markov::discretize::{discretize, ActivitySequence};
use crate::markov::model::{MarkovActivityModel, ModelProvenance, TransitionMatrix, TRANSITIONS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Additive pseudo-count per transition cell. 0.1 is a reasonable choice
    /// for sparse diaries.
    pub smoothing: f64,
    /// Pool all step boundaries into one transition matrix.
    pub stationary: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            smoothing: 0.0,
            stationary: false,
        }
    }
}

/// Fits the chain from weighted diaries.
///
/// Sample weights are rescaled to mean 1 before counting, so the fit does
/// not depend on their absolute scale and the smoothing pseudo-count is
/// relative to one average respondent. A row with no observed transitions
/// becomes a self-loop.
pub fn fit(diaries: &[DiaryRecord], options: &FitOptions) -> Result<MarkovActivityModel> {
    let sequences: Vec<ActivitySequence> = diaries.iter().map(discretize).collect();
    let weights: Vec<f64> = diaries.iter().map(|d| d.sample_weight).collect();
    let mut model = fit_sequences(&sequences, &weights, options)?;

    let mut hasher = Sha256::new();
    for (d, seq) in diaries.iter().zip(&sequences) {
        hasher.update(d.person_id.as_bytes());
        hasher.update([0]);
        hasher.update(d.sample_weight.to_bits().to_le_bytes());
        hasher.update(seq.iter().map(|c| c.index() as u8).collect::<Vec<_>>());
    }
    model = MarkovActivityModel::new(
        *model.alpha(),
        model.xi().to_vec(),
        ModelProvenance {
            inputs_sha256: hex::encode(hasher.finalize()),
            ..model.provenance().clone()
        },
    )?;
    Ok(model)
}

/// Fit directly from discretized sequences and their weights.
pub fn fit_sequences(
    sequences: &[ActivitySequence],
    weights: &[f64],
    options: &FitOptions,
) -> Result<MarkovActivityModel> {
    if sequences.is_empty() {
        return Err(Error::NoData("no diaries to fit".into()));
    }
    if weights.len() != sequences.len() {
        return Err(Error::invalid("fit", "one weight per sequence required"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("fit", "weights must be finite and non-negative"));
    }
    if !(options.smoothing.is_finite() && options.smoothing >= 0.0) {
        return Err(Error::invalid("fit", "smoothing must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoData("all sample weights are zero".into()));
    }
    let scale = sequences.len() as f64 / total;

    let mut alpha_counts = [0.0; NUM_CLASSES];
    let mut counts = vec![[[0.0; NUM_CLASSES]; NUM_CLASSES]; TRANSITIONS];
    for (seq, w) in sequences.iter().zip(weights) {
        let w = w * scale;
        if w == 0.0 {
            continue;
        }
        alpha_counts[seq[0].index()] += w;
        for (t, pair) in seq.windows(2).enumerate() {
            counts[t][pair[0].index()][pair[1].index()] += w;
        }
    }

    let alpha_total: f64 = alpha_counts.iter().sum();
    let alpha = alpha_counts.map(|c| c / alpha_total);

    let xi = if options.stationary {
        let mut pooled = [[0.0; NUM_CLASSES]; NUM_CLASSES];
        for m in &counts {
            for p in 0..NUM_CLASSES {
                for q in 0..NUM_CLASSES {
                    pooled[p][q] += m[p][q];
                }
            }
        }
        vec![normalize_counts(&pooled, options.smoothing); TRANSITIONS]
    } else {
        counts.iter().map(|m| normalize_counts(m, options.smoothing)).collect()
    };

    MarkovActivityModel::new(
        alpha,
        xi,
        ModelProvenance {
            inputs_sha256: String::new(),
            smoothing: options.smoothing,
            stationary: options.stationary,
            records: sequences.len(),
        },
    )
}

fn normalize_counts(counts: &TransitionMatrix, smoothing: f64) -> TransitionMatrix {
    let mut out = [[0.0; NUM_CLASSES]; NUM_CLASSES];
    for (p, row) in counts.iter().enumerate() {
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            out[p][p] = 1.0;
            continue;
        }
        let denom = total + NUM_CLASSES as f64 * smoothing;
        for q in 0..NUM_CLASSES {
            out[p][q] = (row[q] + smoothing) / denom;
        }
    }
    out
}

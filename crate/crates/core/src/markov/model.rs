use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::activity::{ActivityClass, NUM_CLASSES, STEPS, STEP_MINUTES};
use crate::error::{Error, Result};

pub type TransitionMatrix = [[f64; NUM_CLASSES]; NUM_CLASSES];

/// Number of step boundaries, hence transition matrices, in a day.
pub const TRANSITIONS: usize = STEPS - 1;

pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

pub const MODEL_FORMAT: &str = "cvri-markov-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelProvenance {
    /// SHA-256 over the discretized fit inputs; empty for hand-built models.
    pub inputs_sha256: String,
    pub smoothing: f64,
    pub stationary: bool,
    pub records: usize,
}

/// First-order, time-indexed Markov chain over the eight activity classes.
/// `xi[t][p][q]` is the probability of moving from class `p` at step `t` to
/// class `q` at step `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovActivityModel {
    alpha: [f64; NUM_CLASSES],
    xi: Vec<TransitionMatrix>,
    provenance: ModelProvenance,
}

impl MarkovActivityModel {
    pub fn new(alpha: [f64; NUM_CLASSES], xi: Vec<TransitionMatrix>, provenance: ModelProvenance) -> Result<Self> {
        check_distribution(&alpha).map_err(|r| Error::InvalidModel(format!("alpha: {r}")))?;
        if xi.len() != TRANSITIONS {
            return Err(Error::InvalidModel(format!(
                "expected {TRANSITIONS} transition matrices, got {}",
                xi.len()
            )));
        }
        for (t, m) in xi.iter().enumerate() {
            for (p, row) in m.iter().enumerate() {
                check_distribution(row).map_err(|r| Error::InvalidModel(format!("xi[{t}] row {p}: {r}")))?;
            }
        }
        Ok(Self { alpha, xi, provenance })
    }

    /// Same transition matrix at every step boundary.
    pub fn stationary(alpha: [f64; NUM_CLASSES], matrix: TransitionMatrix) -> Result<Self> {
        Self::new(
            alpha,
            vec![matrix; TRANSITIONS],
            ModelProvenance {
                stationary: true,
                ..Default::default()
            },
        )
    }

    pub fn alpha(&self) -> &[f64; NUM_CLASSES] {
        &self.alpha
    }

    pub fn xi(&self) -> &[TransitionMatrix] {
        &self.xi
    }

    pub fn transition(&self, step: usize) -> &TransitionMatrix {
        &self.xi[step]
    }

    pub fn provenance(&self) -> &ModelProvenance {
        &self.provenance
    }

    pub fn is_stationary(&self) -> bool {
        self.xi.windows(2).all(|w| w[0] == w[1])
    }

    pub fn write_json<W: Write>(&self, sink: W) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            steps: STEPS,
            step_minutes: STEP_MINUTES,
            classes: ActivityClass::ALL.iter().map(|c| c.label().to_string()).collect(),
            alpha: self.alpha.to_vec(),
            xi: self.xi.iter().map(|m| m.iter().map(|r| r.to_vec()).collect()).collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_writer_pretty(sink, &file)?;
        Ok(())
    }

    /// Reads a model file, checking format tag, version, grid constants,
    /// class labels, dimensions and stochasticity.
    pub fn read_json<R: Read>(source: R) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(source)?;
        let bad = |r: String| Err(Error::InvalidModel(r));
        if file.format != MODEL_FORMAT {
            return bad(format!("format `{}` is not `{MODEL_FORMAT}`", file.format));
        }
        if file.version != MODEL_FORMAT_VERSION {
            return bad(format!("unsupported version {}", file.version));
        }
        if file.steps != STEPS || file.step_minutes != STEP_MINUTES {
            return bad(format!(
                "grid {}x{} min does not match {STEPS}x{STEP_MINUTES} min",
                file.steps, file.step_minutes
            ));
        }
        let labels: Vec<&str> = ActivityClass::ALL.iter().map(|c| c.label()).collect();
        if file.classes != labels {
            return bad(format!("class labels {:?} do not match {labels:?}", file.classes));
        }
        let alpha = to_array(&file.alpha).ok_or_else(|| Error::InvalidModel("alpha must have 8 entries".into()))?;
        let mut xi = Vec::with_capacity(file.xi.len());
        for (t, m) in file.xi.iter().enumerate() {
            if m.len() != NUM_CLASSES {
                return bad(format!("xi[{t}] must have 8 rows"));
            }
            let mut mat = [[0.0; NUM_CLASSES]; NUM_CLASSES];
            for (p, row) in m.iter().enumerate() {
                mat[p] =
                    to_array(row).ok_or_else(|| Error::InvalidModel(format!("xi[{t}] row {p} must have 8 entries")))?;
            }
            xi.push(mat);
        }
        Self::new(alpha, xi, file.provenance)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    steps: usize,
    step_minutes: u32,
    classes: Vec<String>,
    alpha: Vec<f64>,
    xi: Vec<Vec<Vec<f64>>>,
    provenance: ModelProvenance,
}

fn to_array(v: &[f64]) -> Option<[f64; NUM_CLASSES]> {
    v.try_into().ok()
}

fn check_distribution(v: &[f64; NUM_CLASSES]) -> std::result::Result<(), String> {
    if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err("entries must be finite and non-negative".into());
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(format!("sums to {sum}"));
    }
    Ok(())
}

pub fn identity_matrix() -> TransitionMatrix {
    let mut m = [[0.0; NUM_CLASSES]; NUM_CLASSES];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn one_hot(class: ActivityClass) -> [f64; NUM_CLASSES] {
    let mut v = [0.0; NUM_CLASSES];
    v[class.index()] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_stochastic() {
        let mut m = identity_matrix();
        m[3][3] = 0.9;
        assert!(MarkovActivityModel::stationary(one_hot(ActivityClass::Working), m).is_err());
        assert!(MarkovActivityModel::stationary([0.2; 8], identity_matrix()).is_err());
        assert!(MarkovActivityModel::new(
            one_hot(ActivityClass::Working),
            vec![identity_matrix(); 3],
            Default::default()
        )
        .is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut m = identity_matrix();
        m[0] = [0.1, 0.2, 0.3, 0.05, 0.05, 0.1, 0.1, 0.1];
        let sum: f64 = m[0].iter().sum();
        m[0][7] += 1.0 - sum;
        let model = MarkovActivityModel::stationary([0.125; 8], m).unwrap();
        let mut buf = Vec::new();
        model.write_json(&mut buf).unwrap();
        let back = MarkovActivityModel::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, model);
        assert!(back.is_stationary());
    }

    #[test]
    fn schema_violations_are_reported() {
        let model = MarkovActivityModel::stationary([0.125; 8], identity_matrix()).unwrap();
        let mut buf = Vec::new();
        model.write_json(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let wrong_version = text.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(MarkovActivityModel::read_json(wrong_version.as_bytes()).is_err());
        let wrong_format = text.replacen(MODEL_FORMAT, "other", 1);
        assert!(MarkovActivityModel::read_json(wrong_format.as_bytes()).is_err());
        let wrong_label = text.replacen("\"c08\"", "\"c09\"", 1);
        assert!(MarkovActivityModel::read_json(wrong_label.as_bytes()).is_err());
        let extra = text.replacen("{", "{\"extra\": 1,", 1);
        assert!(MarkovActivityModel::read_json(extra.as_bytes()).is_err());
    }
}

use crate::error::{Error, Result};
use crate::markov::trajectory::OccurrenceMatrix;

/// Divides each activity's occurrence at a step by that step's total, turning
/// raw per-activity occurrence probabilities into a per-step distribution.
pub fn normalize_occurrence(occ: &OccurrenceMatrix) -> Result<OccurrenceMatrix> {
    let mut values = Vec::with_capacity(occ.steps() * occ.activities());
    for step in 0..occ.steps() {
        let row = occ.row(step);
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroOccurrence { step });
        }
        values.extend(row.iter().map(|v| v / total));
    }
    OccurrenceMatrix::new(occ.steps(), occ.activities(), values)
}

use std::io::{Read, Write};

use serde::Serialize;

use crate::activity::{ActivityClass, NUM_CLASSES, STEPS};
use crate::error::{Error, Result};

/// Community activity distribution: one probability row per 15-minute slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMatrix {
    rows: Vec<[f64; NUM_CLASSES]>,
}

pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

impl TrajectoryMatrix {
    /// Validates shape, non-negativity and row sums.
    pub fn new(rows: Vec<[f64; NUM_CLASSES]>) -> Result<Self> {
        if rows.len() != STEPS {
            return Err(Error::InvalidLayer(format!(
                "trajectory needs {STEPS} rows, got {}",
                rows.len()
            )));
        }
        for (t, row) in rows.iter().enumerate() {
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidLayer(format!(
                    "row {t} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidLayer(format!("row {t} sums to {sum}")));
            }
        }
        Ok(Self { rows })
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<[f64; NUM_CLASSES]>) -> Self {
        debug_assert_eq!(rows.len(), STEPS);
        Self { rows }
    }

    pub fn rows(&self) -> &[[f64; NUM_CLASSES]] {
        &self.rows
    }

    pub fn row(&self, step: usize) -> &[f64; NUM_CLASSES] {
        &self.rows[step]
    }

    pub fn get(&self, step: usize, class: ActivityClass) -> f64 {
        self.rows[step][class.index()]
    }

    /// Most probable class at a step; ties go to the lower class index.
    pub fn argmax(&self, step: usize) -> ActivityClass {
        let row = &self.rows[step];
        let mut best = 0;
        for i in 1..NUM_CLASSES {
            if row[i] > row[best] {
                best = i;
            }
        }
        ActivityClass::ALL[best]
    }

    pub fn max_abs_diff(&self, other: &TrajectoryMatrix) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV with header `step,c01,...,c08`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec!["step".to_string()];
        header.extend(ActivityClass::ALL.iter().map(|c| c.label().to_string()));
        w.write_record(&header)?;
        for (t, row) in self.rows.iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<trajectory sink>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(source);
        let header = r.headers()?.clone();
        let expected: Vec<&str> = std::iter::once("step")
            .chain(ActivityClass::ALL.iter().map(|c| c.label()))
            .collect();
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(Error::MalformedHeader(format!(
                "trajectory header must be `{}`",
                expected.join(",")
            )));
        }
        let mut rows = Vec::with_capacity(STEPS);
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let loc = format!("trajectory row {i}");
            if rec[0].parse::<usize>().ok() != Some(i) {
                return Err(Error::invalid(loc, "steps must be 0..95 in order"));
            }
            let mut row = [0.0; NUM_CLASSES];
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = rec[k + 1]
                    .parse()
                    .map_err(|_| Error::invalid(&loc, format!("bad value `{}`", &rec[k + 1])))?;
            }
            rows.push(row);
        }
        Self::new(rows)
    }
}

/// Per-step, per-activity occurrence probabilities whose rows need not sum
/// to one. Row-major, `steps × activities`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccurrenceMatrix {
    steps: usize,
    activities: usize,
    values: Vec<f64>,
}

impl OccurrenceMatrix {
    pub fn new(steps: usize, activities: usize, values: Vec<f64>) -> Result<Self> {
        if steps == 0 || activities == 0 || values.len() != steps * activities {
            return Err(Error::InvalidLayer(format!(
                "occurrence matrix {steps}x{activities} cannot hold {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidLayer(
                "occurrence values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            steps,
            activities,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let activities = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != activities) {
            return Err(Error::InvalidLayer("ragged occurrence rows".into()));
        }
        Self::new(rows.len(), activities, rows.concat())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn activities(&self) -> usize {
        self.activities
    }

    pub fn row(&self, step: usize) -> &[f64] {
        &self.values[step * self.activities..(step + 1) * self.activities]
    }

    pub fn get(&self, step: usize, activity: usize) -> f64 {
        self.values[step * self.activities + activity]
    }
}

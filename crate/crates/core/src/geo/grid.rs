use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::Point;

/// Regular planar grid. Cell `(r, c)` covers
/// `[x0 + c·s, x0 + (c+1)·s) × [y0 + r·s, y0 + (r+1)·s)`; row 0 is the
/// southernmost row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
}

impl GridSpec {
    pub fn new(origin_x: f64, origin_y: f64, cell_size: f64, rows: usize, cols: usize) -> Result<Self> {
        let g = Self {
            origin_x,
            origin_y,
            cell_size,
            rows,
            cols,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.origin_x.is_finite() && self.origin_y.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err(Error::InvalidGrid(format!("cell_size {} must be > 0", self.cell_size)));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidGrid("rows and cols must be >= 1".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn row_col(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    /// Containing cell, or `None` outside the grid.
    pub fn cell_of(&self, p: &Point) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin_x) / self.cell_size;
        let fy = (p.y - self.origin_y) / self.cell_size;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (c, r) = (fx.floor() as usize, fy.floor() as usize);
        (r < self.rows && c < self.cols).then_some((r, c))
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point {
        Point::new(
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// `(x0, y0, x1, y1)` bounds of a cell.
    pub fn cell_bounds(&self, row: usize, col: usize) -> (f64, f64, f64, f64) {
        let x0 = self.origin_x + col as f64 * self.cell_size;
        let y0 = self.origin_y + row as f64 * self.cell_size;
        (x0, y0, x0 + self.cell_size, y0 + self.cell_size)
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} cells of {} m at ({}, {})",
            self.rows, self.cols, self.cell_size, self.origin_x, self.origin_y
        )
    }
}

/// A layer's time coordinate: static, or one of the 96 slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Timestep {
    Static,
    Step(usize),
}

impl fmt::Display for Timestep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timestep::Static => f.write_str("static"),
            Timestep::Step(t) => write!(f, "{t}"),
        }
    }
}

impl Serialize for Timestep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Timestep::Static => s.serialize_str("static"),
            Timestep::Step(t) => s.serialize_u64(*t as u64),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LayerProvenance {
    pub label: String,
    pub input_sha256: String,
}

/// Real-valued raster with nodata cells (`None`), row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawLayer {
    pub grid: GridSpec,
    pub values: Vec<Option<f64>>,
    pub provenance: LayerProvenance,
}

impl RawLayer {
    pub fn new(grid: GridSpec, values: Vec<Option<f64>>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidLayer(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLayer("raw values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            provenance: LayerProvenance::default(),
        })
    }

    pub fn with_provenance(mut self, provenance: LayerProvenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[self.grid.index(row, col)]
    }

    pub fn data_count(&self) -> usize {
        self.values.iter().flatten().count()
    }
}

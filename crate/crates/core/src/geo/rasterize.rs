use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geo::{GridSpec, Point, RawLayer};
use crate::ingest::Zone;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducer {
    Sum,
    Mean,
    Max,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RasterizeReport {
    pub binned: usize,
    pub out_of_bounds: usize,
}

/// Bins point values into grid cells. Cells without points are nodata;
/// points outside the grid are counted and skipped.
pub fn rasterize(points: &[(f64, f64, f64)], grid: &GridSpec, reducer: Reducer) -> Result<(RawLayer, RasterizeReport)> {
    grid.validate()?;
    let mut acc: Vec<Option<(f64, usize)>> = vec![None; grid.len()];
    let mut report = RasterizeReport::default();
    for &(x, y, v) in points {
        let Some((r, c)) = grid.cell_of(&Point::new(x, y)) else {
            report.out_of_bounds += 1;
            continue;
        };
        report.binned += 1;
        let slot = &mut acc[grid.index(r, c)];
        *slot = Some(match (*slot, reducer) {
            (None, _) => (v, 1),
            (Some((a, n)), Reducer::Sum | Reducer::Mean) => (a + v, n + 1),
            (Some((a, n)), Reducer::Max) => (a.max(v), n + 1),
        });
    }
    let values = acc
        .into_iter()
        .map(|cell| {
            cell.map(|(a, n)| match reducer {
                Reducer::Mean => a / n as f64,
                _ => a,
            })
        })
        .collect();
    Ok((RawLayer::new(*grid, values)?, report))
}

/// Paints zone scores onto cells whose centre lies inside the zone polygon.
/// The first zone (in input order) containing a centre wins; cells outside
/// every scored zone are nodata.
pub fn paint_zones(zones: &[Zone], scores: &BTreeMap<String, f64>, grid: &GridSpec) -> Result<RawLayer> {
    grid.validate()?;
    let scored: Vec<(&Zone, f64)> = zones
        .iter()
        .filter_map(|z| scores.get(&z.zone_id).map(|s| (z, *s)))
        .collect();
    let values = (0..grid.len())
        .map(|i| {
            let (r, c) = grid.row_col(i);
            let center = grid.cell_center(r, c);
            scored
                .iter()
                .find(|(z, _)| z.geometry.contains(&center))
                .map(|(_, s)| *s)
        })
        .collect();
    RawLayer::new(*grid, values)
}

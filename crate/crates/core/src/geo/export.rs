use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geo::geometry::rect_coordinates;
use crate::geo::{CellValues, GridSpec, Timestep};
use crate::vri::VRIWeights;

/// `row,col,value` for every cell; nodata cells have an empty value.
pub fn write_values_csv<W: Write>(layer: &dyn CellValues, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["row", "col", "value"])?;
    let grid = layer.grid();
    for i in 0..grid.len() {
        let (r, c) = grid.row_col(i);
        let v = layer.value(i).map(|v| v.to_string()).unwrap_or_default();
        w.write_record([r.to_string(), c.to_string(), v])?;
    }
    w.flush().map_err(|e| Error::io("<csv sink>", e))?;
    Ok(())
}

/// Reads a `row,col,value` export back into a row-major vector for `grid`.
pub fn read_values_csv<R: Read>(source: R, grid: &GridSpec) -> Result<Vec<Option<f64>>> {
    let mut rd = csv::Reader::from_reader(source);
    if rd.headers()?.iter().collect::<Vec<_>>() != ["row", "col", "value"] {
        return Err(Error::MalformedHeader("expected row,col,value".into()));
    }
    let mut out = vec![None; grid.len()];
    for (n, rec) in rd.records().enumerate() {
        let rec = rec?;
        let loc = format!("line {}", n + 2);
        let parse_idx = |s: &str, max: usize| -> Result<usize> {
            s.parse::<usize>()
                .ok()
                .filter(|v| *v < max)
                .ok_or_else(|| Error::invalid(&loc, format!("index `{s}` outside grid")))
        };
        let r = parse_idx(&rec[0], grid.rows)?;
        let c = parse_idx(&rec[1], grid.cols)?;
        out[grid.index(r, c)] = match &rec[2] {
            "" => None,
            s => Some(
                s.parse()
                    .map_err(|_| Error::invalid(&loc, format!("bad value `{s}`")))?,
            ),
        };
    }
    Ok(out)
}

/// GeoJSON FeatureCollection with one square polygon per data cell.
pub fn cells_geojson(layer: &dyn CellValues) -> Value {
    let grid = layer.grid();
    let features: Vec<Value> = (0..grid.len())
        .filter_map(|i| {
            let v = layer.value(i)?;
            let (r, c) = grid.row_col(i);
            let (x0, y0, x1, y1) = grid.cell_bounds(r, c);
            let mut props = serde_json::Map::new();
            props.insert("row".into(), json!(r));
            props.insert("col".into(), json!(c));
            props.insert(layer.value_name().into(), json!(v));
            Some(json!({
                "type": "Feature",
                "geometry": { "type": "Polygon", "coordinates": rect_coordinates(x0, y0, x1, y1) },
                "properties": props,
            }))
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

pub fn write_cells_geojson<W: Write>(layer: &dyn CellValues, mut sink: W) -> Result<()> {
    serde_json::to_writer(&mut sink, &cells_geojson(layer))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub timestep: usize,
    pub clock: String,
    pub csv: String,
    pub png: String,
    pub geojson: String,
    pub mean_v: Option<f64>,
}

/// Lists the frames of a temporal sweep with the weights used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub weights: VRIWeights,
    pub ramp: String,
    pub grid: GridSpec,
    pub frames: Vec<FrameEntry>,
}

impl SweepManifest {
    pub fn write_json<W: Write>(&self, mut sink: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut sink, self)?;
        sink.write_all(b"\n").map_err(|e| Error::io("<manifest sink>", e))?;
        Ok(())
    }

    pub fn frame(&self, timestep: usize) -> Option<&FrameEntry> {
        self.frames.iter().find(|f| f.timestep == timestep)
    }
}

/// File stem used for a frame: `vri_t040`.
pub fn frame_stem(t: Timestep) -> String {
    match t {
        Timestep::Static => "vri_static".into(),
        Timestep::Step(t) => format!("vri_t{t:03}"),
    }
}

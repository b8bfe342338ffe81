//! Rasters, rendering and exports.

mod export;
pub mod geometry;
mod grid;
mod rasterize;
mod render;
mod sweep;

pub use export::{
    cells_geojson, frame_stem, read_values_csv, write_cells_geojson, write_values_csv, FrameEntry, SweepManifest,
};
pub use geometry::Point;
pub use grid::{GridSpec, LayerProvenance, RawLayer, Timestep};
pub use rasterize::{paint_zones, rasterize, RasterizeReport, Reducer};
pub use render::{
    hex, legend, luminance, ramp, render, CellValues, Image, Legend, LegendEntry, Ramp, DEFAULT_RAMP, LEVEL_LABELS,
    RAMPS,
};
pub use sweep::{render_frames, temporal_sweep};

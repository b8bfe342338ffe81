use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::{GridSpec, RawLayer};
use crate::vri::{AspectLayer, VulnerabilityMap};

/// A grid of per-cell values or nodata. Rendering clamps values to [1, 5].
pub trait CellValues {
    fn grid(&self) -> &GridSpec;
    fn value(&self, index: usize) -> Option<f64>;
    /// Property name used in exports: `rank`, `V` or `raw`.
    fn value_name(&self) -> &'static str;
}

impl CellValues for AspectLayer {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn value(&self, index: usize) -> Option<f64> {
        self.ranks[index].map(f64::from)
    }
    fn value_name(&self) -> &'static str {
        "rank"
    }
}

impl CellValues for RawLayer {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn value(&self, index: usize) -> Option<f64> {
        self.values[index]
    }
    fn value_name(&self) -> &'static str {
        "raw"
    }
}

impl CellValues for VulnerabilityMap {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn value(&self, index: usize) -> Option<f64> {
        self.values[index]
    }
    fn value_name(&self) -> &'static str {
        "V"
    }
}

/// Five colour stops for values 1 to 5, lightest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ramp {
    pub id: &'static str,
    pub stops: [[u8; 3]; 5],
}

pub const RAMPS: [Ramp; 3] = [
    Ramp {
        id: "ylorrd",
        stops: [
            [0xff, 0xff, 0xb2],
            [0xfe, 0xcc, 0x5c],
            [0xfd, 0x8d, 0x3c],
            [0xf0, 0x3b, 0x20],
            [0xbd, 0x00, 0x26],
        ],
    },
    Ramp {
        id: "greys",
        stops: [
            [0xf7, 0xf7, 0xf7],
            [0xcc, 0xcc, 0xcc],
            [0x96, 0x96, 0x96],
            [0x63, 0x63, 0x63],
            [0x25, 0x25, 0x25],
        ],
    },
    Ramp {
        id: "blues",
        stops: [
            [0xef, 0xf3, 0xff],
            [0xbd, 0xd7, 0xe7],
            [0x6b, 0xae, 0xd6],
            [0x31, 0x82, 0xbd],
            [0x08, 0x51, 0x9c],
        ],
    },
];

pub const DEFAULT_RAMP: &str = "ylorrd";

pub const LEVEL_LABELS: [&str; 5] = ["low", "medium-low", "medium", "medium-high", "high"];

pub fn ramp(id: &str) -> Result<&'static Ramp> {
    RAMPS.iter().find(|r| r.id == id).ok_or_else(|| Error::UnknownRamp {
        requested: id.to_string(),
        available: RAMPS.iter().map(|r| r.id.to_string()).collect(),
    })
}

/// Rec. 709 luma of an 8-bit colour.
pub fn luminance(rgb: [u8; 3]) -> f64 {
    0.2126 * f64::from(rgb[0]) + 0.7152 * f64::from(rgb[1]) + 0.0722 * f64::from(rgb[2])
}

impl Ramp {
    /// Exact stop for integer values, linear blend between stops otherwise.
    /// Values are clamped to [1, 5].
    pub fn color(&self, value: f64) -> [u8; 3] {
        let pos = (value.clamp(1.0, 5.0) - 1.0).min(4.0);
        let i = (pos.floor() as usize).min(3);
        let f = pos - i as f64;
        let (a, b) = (self.stops[i], self.stops[i + 1]);
        std::array::from_fn(|k| (f64::from(a[k]) + f * (f64::from(b[k]) - f64::from(a[k]))).round() as u8)
    }
}

pub fn hex(rgb: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

/// RGBA raster, row 0 at the top (north).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub rgba: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let o = ((y * self.width + x) * 4) as usize;
        [self.rgba[o], self.rgba[o + 1], self.rgba[o + 2], self.rgba[o + 3]]
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgba);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header()?;
            writer.write_image_data(&self.rgba)?;
        }
        Ok(out)
    }
}

/// Draws each cell as a `cell_px × cell_px` block, north up. Nodata cells
/// are fully transparent.
pub fn render(layer: &dyn CellValues, ramp_id: &str, cell_px: u32) -> Result<Image> {
    let ramp = ramp(ramp_id)?;
    let grid = layer.grid();
    let cell_px = cell_px.max(1);
    let width = grid.cols as u32 * cell_px;
    let height = grid.rows as u32 * cell_px;
    let mut rgba = vec![0u8; (width * height * 4) as usize];
    for y in 0..height {
        let row = grid.rows - 1 - (y / cell_px) as usize;
        for x in 0..width {
            let col = (x / cell_px) as usize;
            if let Some(v) = layer.value(grid.index(row, col)) {
                let [r, g, b] = ramp.color(v);
                let o = ((y * width + x) * 4) as usize;
                rgba[o..o + 4].copy_from_slice(&[r, g, b, 255]);
            }
        }
    }
    Ok(Image { width, height, rgba })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendEntry {
    pub value: u8,
    pub label: &'static str,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Legend {
    pub ramp: &'static str,
    pub value_name: &'static str,
    pub entries: Vec<LegendEntry>,
    pub nodata: &'static str,
    pub interpolation: &'static str,
}

pub fn legend(layer: &dyn CellValues, ramp_id: &str) -> Result<Legend> {
    let ramp = ramp(ramp_id)?;
    Ok(Legend {
        ramp: ramp.id,
        value_name: layer.value_name(),
        entries: (0..5)
            .map(|i| LegendEntry {
                value: i as u8 + 1,
                label: LEVEL_LABELS[i],
                color: hex(ramp.stops[i]),
            })
            .collect(),
        nodata: "transparent",
        interpolation: "linear between stops",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Timestep;
    use crate::vri::{Aspect, VRIWeights};

    fn map(values: Vec<Option<f64>>, rows: usize, cols: usize) -> VulnerabilityMap {
        VulnerabilityMap {
            grid: GridSpec::new(0.0, 0.0, 10.0, rows, cols).unwrap(),
            values,
            timestep: Timestep::Step(0),
            weights: VRIWeights::default(),
        }
    }

    #[test]
    fn ramps_darken_monotonically() {
        for r in RAMPS {
            for w in r.stops.windows(2) {
                assert!(luminance(w[1]) < luminance(w[0]), "{}", r.id);
            }
        }
    }

    #[test]
    fn unknown_ramp_lists_available() {
        let msg = ramp("viridis").unwrap_err().to_string();
        assert!(msg.contains("viridis") && msg.contains("ylorrd") && msg.contains("blues"));
    }

    #[test]
    fn constant_layer_is_uniform() {
        let img = render(&map(vec![Some(3.0); 6], 2, 3), "ylorrd", 4).unwrap();
        assert_eq!((img.width, img.height), (12, 8));
        let first = img.pixel(0, 0);
        assert_eq!(first, [0xfd, 0x8d, 0x3c, 255]);
        assert!(img.rgba.chunks(4).all(|p| p == first));
    }

    #[test]
    fn higher_value_is_darker_and_nodata_transparent() {
        let img = render(&map(vec![Some(1.0), Some(5.0), None], 1, 3), "greys", 1).unwrap();
        let l = |x| {
            let p = img.pixel(x, 0);
            luminance([p[0], p[1], p[2]])
        };
        assert!(l(1) < l(0));
        assert_eq!(img.pixel(2, 0)[3], 0);
    }

    #[test]
    fn north_up_orientation() {
        // grid row 1 is north, so it is drawn on image row 0
        let img = render(&map(vec![Some(1.0), Some(5.0)], 2, 1), "ylorrd", 1).unwrap();
        assert_eq!(img.pixel(0, 0), [0xbd, 0x00, 0x26, 255]);
        assert_eq!(img.pixel(0, 1), [0xff, 0xff, 0xb2, 255]);
    }

    #[test]
    fn five_ranks_match_ramp_table() {
        let g = GridSpec::new(0.0, 0.0, 1.0, 1, 5).unwrap();
        let layer = AspectLayer::new(g, (1..=5).map(Some).collect(), Aspect::Demographic, Timestep::Static).unwrap();
        let img = render(&layer, "blues", 1).unwrap();
        let expected = ["#eff3ff", "#bdd7e7", "#6baed6", "#3182bd", "#08519c"];
        for (x, hex_code) in expected.iter().enumerate() {
            let p = img.pixel(x as u32, 0);
            assert_eq!(&hex([p[0], p[1], p[2]]), hex_code);
        }
        let lg = legend(&layer, "blues").unwrap();
        assert_eq!(lg.value_name, "rank");
        assert_eq!(lg.entries[4].color, "#08519c");
    }

    #[test]
    fn png_is_deterministic() {
        let m = map(vec![Some(2.5), None, Some(4.2), Some(1.0)], 2, 2);
        let a = render(&m, "ylorrd", 3).unwrap().to_png().unwrap();
        let b = render(&m, "ylorrd", 3).unwrap().to_png().unwrap();
        assert_eq!(a, b);
        assert_eq!(&a[1..4], b"PNG");
    }
}

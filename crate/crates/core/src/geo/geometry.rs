//! Minimal planar geometry for the GeoJSON profile used by the inputs.
//! Coordinates are pre-projected metres; no reprojection happens here.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A polygon with one exterior ring and optional holes. Rings may or may not
/// repeat the first vertex at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Vec<Point>,
    pub holes: Vec<Vec<Point>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(Point),
    Polygons(Vec<Polygon>),
}

impl Geometry {
    /// Area-weighted centroid for polygons; the point itself for points.
    pub fn centroid(&self) -> Option<Point> {
        match self {
            Geometry::Point(p) => Some(*p),
            Geometry::Polygons(polys) => {
                let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
                for poly in polys {
                    for (i, ring) in std::iter::once(&poly.exterior).chain(&poly.holes).enumerate() {
                        let (ra, rx, ry) = ring_moments(ring);
                        // holes subtract regardless of their winding
                        let sign = if i == 0 { ra.signum() } else { -ra.signum() };
                        a += sign * ra;
                        cx += sign * rx;
                        cy += sign * ry;
                    }
                }
                if a.abs() > 1e-12 {
                    Some(Point::new(cx / a, cy / a))
                } else {
                    // degenerate: fall back to vertex mean
                    let pts: Vec<&Point> = polys.iter().flat_map(|p| &p.exterior).collect();
                    if pts.is_empty() {
                        return None;
                    }
                    let n = pts.len() as f64;
                    Some(Point::new(
                        pts.iter().map(|p| p.x).sum::<f64>() / n,
                        pts.iter().map(|p| p.y).sum::<f64>() / n,
                    ))
                }
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Geometry::Point(_) => false,
            Geometry::Polygons(polys) => polys.iter().any(|poly| poly.contains(p)),
        }
    }
}

impl Polygon {
    /// Even-odd containment test; points exactly on an edge count as inside
    /// for left/bottom edges only, so adjacent polygons never both claim one.
    pub fn contains(&self, p: &Point) -> bool {
        ring_contains(&self.exterior, p) && !self.holes.iter().any(|h| ring_contains(h, p))
    }
}

/// Signed area and first moments (times area) of a ring.
fn ring_moments(ring: &[Point]) -> (f64, f64, f64) {
    let n = ring.len();
    if n < 3 {
        return (0.0, 0.0, 0.0);
    }
    let (mut a2, mut cx6, mut cy6) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let cross = p.x * q.y - q.x * p.y;
        a2 += cross;
        cx6 += (p.x + q.x) * cross;
        cy6 += (p.y + q.y) * cross;
    }
    let area = a2 / 2.0;
    (area, cx6 / 6.0, cy6 / 6.0)
}

fn ring_contains(ring: &[Point], p: &Point) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Parses a GeoJSON geometry object (Point, Polygon, MultiPolygon).
pub fn parse_geometry(value: &Value) -> Result<Geometry, String> {
    let kind = value
        .get("type")
        .and_then(Value::as_str)
        .ok_or("geometry has no type")?;
    let coords = value.get("coordinates").ok_or("geometry has no coordinates")?;
    match kind {
        "Point" => Ok(Geometry::Point(parse_position(coords)?)),
        "Polygon" => Ok(Geometry::Polygons(vec![parse_polygon(coords)?])),
        "MultiPolygon" => {
            let polys = coords
                .as_array()
                .ok_or("MultiPolygon coordinates must be an array")?
                .iter()
                .map(parse_polygon)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Geometry::Polygons(polys))
        }
        other => Err(format!("unsupported geometry type {other}")),
    }
}

fn parse_position(v: &Value) -> Result<Point, String> {
    let arr = v.as_array().ok_or("position must be an array")?;
    match (arr.first().and_then(Value::as_f64), arr.get(1).and_then(Value::as_f64)) {
        (Some(x), Some(y)) if x.is_finite() && y.is_finite() => Ok(Point::new(x, y)),
        _ => Err("position must hold two finite numbers".to_string()),
    }
}

fn parse_ring(v: &Value) -> Result<Vec<Point>, String> {
    let mut ring = v
        .as_array()
        .ok_or("ring must be an array")?
        .iter()
        .map(parse_position)
        .collect::<Result<Vec<_>, _>>()?;
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 {
        return Err("ring needs at least three distinct vertices".to_string());
    }
    Ok(ring)
}

fn parse_polygon(v: &Value) -> Result<Polygon, String> {
    let rings = v.as_array().ok_or("polygon must be an array of rings")?;
    let mut rings = rings.iter().map(parse_ring);
    let exterior = rings.next().ok_or("polygon has no rings")??;
    let holes = rings.collect::<Result<Vec<_>, _>>()?;
    Ok(Polygon { exterior, holes })
}

/// Axis-aligned rectangle as a closed GeoJSON polygon coordinate array.
pub fn rect_coordinates(x0: f64, y0: f64, x1: f64, y1: f64) -> Value {
    serde_json::json!([[[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn square(x0: f64, y0: f64, s: f64) -> Geometry {
        parse_geometry(&json!({"type": "Polygon", "coordinates": rect_coordinates(x0, y0, x0 + s, y0 + s)})).unwrap()
    }

    #[test]
    fn square_centroid_and_containment() {
        let g = square(10.0, 20.0, 4.0);
        assert_eq!(g.centroid(), Some(Point::new(12.0, 22.0)));
        assert!(g.contains(&Point::new(11.0, 21.0)));
        assert!(!g.contains(&Point::new(15.0, 21.0)));
    }

    #[test]
    fn hole_shifts_centroid_and_excludes_points() {
        let g = parse_geometry(&json!({
            "type": "Polygon",
            "coordinates": [
                [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0], [0.0, 0.0]],
                [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [0.0, 0.0]]
            ]
        }))
        .unwrap();
        // L-shape: area 12, centroid from (16*(2,2) - 4*(1,1)) / 12
        let c = g.centroid().unwrap();
        assert!((c.x - 28.0 / 12.0).abs() < 1e-12);
        assert!((c.y - 28.0 / 12.0).abs() < 1e-12);
        assert!(!g.contains(&Point::new(1.0, 1.0)));
        assert!(g.contains(&Point::new(3.0, 3.0)));
    }

    #[test]
    fn adjacent_squares_do_not_share_edge_points() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(1.0, 0.0, 1.0);
        let p = Point::new(1.0, 0.5);
        assert!(a.contains(&p) ^ b.contains(&p));
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(parse_geometry(&json!({"type": "LineString", "coordinates": []})).is_err());
        assert!(parse_geometry(&json!({"type": "Point", "coordinates": ["a", 1]})).is_err());
        assert!(parse_geometry(&json!({"type": "Polygon", "coordinates": [[[0,0],[1,1],[0,0]]]})).is_err());
    }
}

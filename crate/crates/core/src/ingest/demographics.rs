use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geo::geometry::{parse_geometry, Geometry};
use crate::mapping::SchoolLevel;

const SHARE_PREFIX: &str = "share_";
const SCHOOL_PREFIX: &str = "share_school_";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneDemographics {
    pub zone_id: String,
    pub population: u64,
    /// Column name (`share_*`) to fraction in [0, 1].
    pub shares: BTreeMap<String, f64>,
}

impl ZoneDemographics {
    pub fn share(&self, variable: &str) -> Option<f64> {
        self.shares.get(variable).copied()
    }

    /// Shares of the school-age population by level, from the
    /// `share_school_<level>` columns (missing columns count as 0).
    pub fn school_shares(&self) -> [f64; 4] {
        SchoolLevel::ALL.map(|l| self.share(&format!("{SCHOOL_PREFIX}{}", l.as_str())).unwrap_or(0.0))
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        for (k, v) in &self.shares {
            if !(0.0..=1.0).contains(v) {
                return Err(format!("{k} = {v} outside [0,1]"));
            }
        }
        let school: f64 = self.school_shares().iter().sum();
        if school > 1.0 + 1e-9 {
            return Err(format!("school-level shares sum to {school} > 1"));
        }
        Ok(())
    }
}

/// Parses `zone_id,population,share_*`. Any invalid row is fatal since zone
/// tables are small and a silently missing zone would distort every score.
pub fn parse_demographics<R: Read>(source: R) -> Result<Vec<ZoneDemographics>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "zone_id" || &headers[1] != "population" {
        return Err(Error::MalformedHeader(format!(
            "expected `zone_id,population,share_*`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    for h in headers.iter().skip(2) {
        if !h.starts_with(SHARE_PREFIX) || h.len() == SHARE_PREFIX.len() {
            return Err(Error::MalformedHeader(format!("column `{h}` is not a share_* column")));
        }
    }

    let mut zones: Vec<ZoneDemographics> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let loc = format!("demographics line {line}");
        let zone_id = row[0].to_string();
        if zone_id.is_empty() {
            return Err(Error::invalid(loc, "empty zone_id"));
        }
        if zones.iter().any(|z| z.zone_id == zone_id) {
            return Err(Error::invalid(loc, format!("duplicate zone_id `{zone_id}`")));
        }
        let population = row[1]
            .parse::<u64>()
            .map_err(|_| Error::invalid(&loc, format!("population `{}` is not a count", &row[1])))?;
        let mut shares = BTreeMap::new();
        for (name, value) in headers.iter().zip(row.iter()).skip(2) {
            if value.is_empty() {
                continue;
            }
            let v = value
                .parse::<f64>()
                .map_err(|_| Error::invalid(&loc, format!("{name} `{value}` is not a number")))?;
            shares.insert(name.to_string(), v);
        }
        let zone = ZoneDemographics {
            zone_id,
            population,
            shares,
        };
        zone.validate().map_err(|r| Error::invalid(&loc, r))?;
        zones.push(zone);
    }
    Ok(zones)
}

pub fn write_demographics<W: Write>(zones: &[ZoneDemographics], sink: W) -> Result<()> {
    let mut columns: Vec<&String> = zones.iter().flat_map(|z| z.shares.keys()).collect();
    columns.sort();
    columns.dedup();
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["zone_id".to_string(), "population".to_string()];
    header.extend(columns.iter().map(|c| c.to_string()));
    w.write_record(&header)?;
    for z in zones {
        let mut row = vec![z.zone_id.clone(), z.population.to_string()];
        row.extend(
            columns
                .iter()
                .map(|c| z.shares.get(*c).map(|v| v.to_string()).unwrap_or_default()),
        );
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<demographics sink>", e))?;
    Ok(())
}

/// Zone footprint used to paint zone-level scores onto the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub zone_id: String,
    pub geometry: Geometry,
}

/// Parses a zone FeatureCollection with a `zone_id` property and polygonal
/// geometry per feature.
pub fn parse_zones<R: Read>(source: R) -> Result<Vec<Zone>> {
    let doc: Value = serde_json::from_reader(source)?;
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .filter(|_| doc.get("type").and_then(Value::as_str) == Some("FeatureCollection"))
        .ok_or_else(|| Error::invalid("zones", "document is not a FeatureCollection"))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let loc = format!("zone feature {i}");
            let zone_id = match f.get("properties").and_then(|p| p.get("zone_id")) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err(Error::invalid(loc, "missing zone_id")),
            };
            let geometry = f
                .get("geometry")
                .ok_or_else(|| "missing geometry".to_string())
                .and_then(parse_geometry)
                .map_err(|r| Error::invalid(&loc, r))?;
            if matches!(geometry, Geometry::Point(_)) {
                return Err(Error::invalid(loc, "zone geometry must be polygonal"));
            }
            Ok(Zone { zone_id, geometry })
        })
        .collect()
}

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geo::geometry::parse_geometry;
use crate::mapping::{
    Allocation, Building, BuildingType, Construction, EnergyStructure, Environment, Glazing, SchoolLevel,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedFeature {
    /// Position of the feature in the collection.
    pub index: usize,
    pub building_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BuildingReport {
    pub accepted: usize,
    pub rejected: Vec<RejectedFeature>,
}

/// Parses a building FeatureCollection. Each feature is validated on its own;
/// invalid features are rejected with a reason and the rest are kept. Only a
/// document that is not a FeatureCollection is fatal.
pub fn parse_buildings<R: Read>(source: R) -> Result<(Vec<Building>, BuildingReport)> {
    let doc: Value = serde_json::from_reader(source)?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::invalid("buildings", "document is not a FeatureCollection"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::invalid("buildings", "FeatureCollection has no features array"))?;

    let mut report = BuildingReport::default();
    let mut seen = HashSet::new();
    let mut buildings = Vec::with_capacity(features.len());
    for (index, feature) in features.iter().enumerate() {
        let id = feature_id(feature);
        let result = parse_feature(feature).and_then(|b| {
            if seen.insert(b.building_id.clone()) {
                Ok(b)
            } else {
                Err(format!("duplicate building_id `{}`", b.building_id))
            }
        });
        match result {
            Ok(b) => buildings.push(b),
            Err(reason) => report.rejected.push(RejectedFeature {
                index,
                building_id: id,
                reason,
            }),
        }
    }
    report.accepted = buildings.len();
    Ok((buildings, report))
}

fn feature_id(feature: &Value) -> Option<String> {
    let props = feature.get("properties");
    props
        .and_then(|p| p.get("building_id"))
        .or_else(|| feature.get("id"))
        .and_then(|v| match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        })
}

struct Props<'a>(&'a Map<String, Value>);

impl Props<'_> {
    fn number(&self, key: &str) -> Result<f64, String> {
        match self.0.get(key) {
            None | Some(Value::Null) => Err(format!("missing {key}")),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("{key} is not a number")),
        }
    }

    fn text(&self, key: &str) -> Result<&str, String> {
        match self.0.get(key) {
            None | Some(Value::Null) => Err(format!("missing {key}")),
            Some(v) => v.as_str().ok_or_else(|| format!("{key} is not a string")),
        }
    }

    fn nonneg(&self, key: &str) -> Result<f64, String> {
        let v = self.number(key)?;
        if v < 0.0 {
            Err(format!("negative {key} {v}"))
        } else {
            Ok(v)
        }
    }
}

fn parse_feature(feature: &Value) -> Result<Building, String> {
    let props = feature
        .get("properties")
        .and_then(Value::as_object)
        .ok_or("feature has no properties")?;
    let p = Props(props);
    let building_id = feature_id(feature).ok_or("missing building_id")?;
    let btype: BuildingType = p.text("type")?.parse()?;
    let zone_id = match props.get("zone_id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => String::new(),
    };
    let geometry = feature.get("geometry").ok_or("missing geometry")?;
    let centroid = parse_geometry(geometry)?.centroid().ok_or("geometry has no centroid")?;

    let allocation = match btype {
        BuildingType::Residential => {
            let bedrooms = p.nonneg("bedrooms")?;
            if bedrooms.fract() != 0.0 || bedrooms > u32::MAX as f64 {
                return Err(format!("bedrooms {bedrooms} is not a count"));
            }
            Allocation::Residential {
                bedrooms: bedrooms as u32,
                vacancy_rate: p.number("vacancy_rate")?,
            }
        }
        BuildingType::Business => Allocation::Business {
            gross_floor_area: p.nonneg("gross_floor_area")?,
            worker_density: p.nonneg("worker_density")?,
        },
        BuildingType::Mercantile | BuildingType::PublicService | BuildingType::Assembly => Allocation::Capacity {
            capacity: p.nonneg("capacity")?,
        },
        BuildingType::Education => Allocation::Education {
            capacity: p.nonneg("capacity")?,
            school_level: p.text("school_level")?.parse::<SchoolLevel>()?,
        },
    };
    let year = p.number("year_built")?;
    if year.fract() != 0.0 {
        return Err(format!("year_built {year} is not a year"));
    }
    let environment = Environment {
        year_built: year as i32,
        floor_area_m2: p.nonneg("floor_area_m2")?,
        construction: p.text("construction")?.parse::<Construction>()?,
        glazing: p.text("glazing")?.parse::<Glazing>()?,
        energy_structure: p.text("energy_structure")?.parse::<EnergyStructure>()?,
    };
    let building = Building {
        building_id,
        btype,
        centroid,
        zone_id,
        allocation,
        environment,
    };
    building.validate()?;
    Ok(building)
}

/// Writes buildings as a FeatureCollection with point geometries at the
/// centroids, in input order.
pub fn write_buildings<W: Write>(buildings: &[Building], sink: W) -> Result<()> {
    let features: Vec<Value> = buildings.iter().map(building_feature).collect();
    let doc = json!({"type": "FeatureCollection", "features": features});
    serde_json::to_writer_pretty(sink, &doc)?;
    Ok(())
}

fn building_feature(b: &Building) -> Value {
    let mut props = Map::new();
    props.insert("building_id".into(), json!(b.building_id));
    props.insert("type".into(), json!(b.btype.as_str()));
    props.insert("zone_id".into(), json!(b.zone_id));
    match b.allocation {
        Allocation::Residential { bedrooms, vacancy_rate } => {
            props.insert("bedrooms".into(), json!(bedrooms));
            props.insert("vacancy_rate".into(), json!(vacancy_rate));
        }
        Allocation::Business {
            gross_floor_area,
            worker_density,
        } => {
            props.insert("gross_floor_area".into(), json!(gross_floor_area));
            props.insert("worker_density".into(), json!(worker_density));
        }
        Allocation::Capacity { capacity } => {
            props.insert("capacity".into(), json!(capacity));
        }
        Allocation::Education { capacity, school_level } => {
            props.insert("capacity".into(), json!(capacity));
            props.insert("school_level".into(), json!(school_level.as_str()));
        }
    }
    let env = &b.environment;
    props.insert("year_built".into(), json!(env.year_built));
    props.insert("floor_area_m2".into(), json!(env.floor_area_m2));
    props.insert("construction".into(), json!(env.construction.as_str()));
    props.insert("glazing".into(), json!(env.glazing.as_str()));
    props.insert("energy_structure".into(), json!(env.energy_structure.as_str()));
    json!({
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [b.centroid.x, b.centroid.y]},
        "properties": props,
    })
}

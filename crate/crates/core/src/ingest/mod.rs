//! Parsers for the documented input formats: diary CSV, building and zone
//! GeoJSON, demographics CSV and GPS trace CSV.

mod buildings;
mod codes;
mod demographics;
mod diary;
mod gps;

pub use buildings::{parse_buildings, write_buildings, BuildingReport, RejectedFeature};
pub use codes::ActivityCodeMap;
pub use demographics::{parse_demographics, parse_zones, write_demographics, Zone, ZoneDemographics};
pub use diary::{parse_diaries, write_diaries, DiaryEntry, DiaryRecord, ParseIssue, ParseReport};
pub use gps::{parse_gps, write_gps, GpsFix, GpsReport, TimeLocationPath};

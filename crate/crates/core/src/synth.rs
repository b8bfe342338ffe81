//! Deterministic synthetic county used by the examples, tests and the
//! bundled dataset in `data/synthetic_county`.
//!
//! The county is 2 km on a side: 16 square zones, a denser downtown with
//! offices, shops and services, residential blocks around it and schools
//! spread across. Diaries follow a handful of personas coded with ATUS-style
//! six-digit activity codes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::activity::DAY_MINUTES;
use crate::error::{Error, Result};
use crate::geo::geometry::rect_coordinates;
use crate::geo::{GridSpec, Point};
use crate::ingest::{
    write_demographics, write_diaries, write_gps, ActivityCodeMap, DiaryEntry, DiaryRecord, GpsFix, TimeLocationPath,
    ZoneDemographics,
};
use crate::mapping::{
    Allocation, Building, BuildingType, Construction, EnergyStructure, Environment, Glazing, SchoolLevel,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub seed: u64,
    pub persons: usize,
    /// Workers who also carry a GPS trace.
    pub gps_persons: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            persons: 2000,
            gps_persons: 40,
        }
    }
}

pub const SIDE_M: f64 = 2000.0;
pub const CELL_M: f64 = 100.0;
pub const ZONES_PER_SIDE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCounty {
    pub grid: GridSpec,
    /// `(zone_id, [x0, y0, x1, y1])`
    pub zones: Vec<(String, [f64; 4])>,
    pub demographics: Vec<ZoneDemographics>,
    pub buildings: Vec<Building>,
    /// Half edge of each building's square footprint, in metres.
    pub footprint_half: Vec<f64>,
    pub diaries: Vec<DiaryRecord>,
    pub gps: Vec<TimeLocationPath>,
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn zone_of(p: &Point) -> String {
    let z = SIDE_M / ZONES_PER_SIDE as f64;
    let c = ((p.x / z) as usize).min(ZONES_PER_SIDE - 1);
    let r = ((p.y / z) as usize).min(ZONES_PER_SIDE - 1);
    format!("Z{:02}", r * ZONES_PER_SIDE + c + 1)
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[(T, f64)]) -> T {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut u = rng.gen_range(0.0..total);
    for (item, w) in items {
        if u < *w {
            return *item;
        }
        u -= w;
    }
    items.last().expect("non-empty choices").0
}

fn environment(rng: &mut ChaCha8Rng, floor_area: f64) -> Environment {
    let year_built = rng.gen_range(1920..=2020);
    let modern = year_built >= 1980;
    Environment {
        year_built,
        floor_area_m2: floor_area.round(),
        construction: pick(
            rng,
            &[
                (Construction::LightFrame, 3.0),
                (Construction::Wood, 3.0),
                (Construction::Masonry, 2.0),
                (Construction::Concrete, 1.5),
                (Construction::Steel, 0.5),
            ],
        ),
        glazing: if modern {
            pick(
                rng,
                &[(Glazing::Double, 3.0), (Glazing::Triple, 1.0), (Glazing::Single, 0.5)],
            )
        } else {
            pick(rng, &[(Glazing::Single, 3.0), (Glazing::Double, 1.0)])
        },
        energy_structure: pick(
            rng,
            &[
                (EnergyStructure::AllElectric, 1.0),
                (EnergyStructure::Mixed, 2.0),
                (EnergyStructure::NonElectric, 1.0),
            ],
        ),
    }
}

/// Point near downtown (spread `s`) or anywhere, kept inside the county.
fn location(rng: &mut ChaCha8Rng, downtown: Option<f64>) -> Point {
    let margin = 20.0;
    let (x, y) = match downtown {
        Some(s) => {
            let c = SIDE_M / 2.0;
            (c + rng.gen_range(-s..s), c + rng.gen_range(-s..s))
        }
        None => (
            rng.gen_range(margin..SIDE_M - margin),
            rng.gen_range(margin..SIDE_M - margin),
        ),
    };
    Point::new(
        round1(x.clamp(margin, SIDE_M - margin)),
        round1(y.clamp(margin, SIDE_M - margin)),
    )
}

fn buildings(rng: &mut ChaCha8Rng) -> (Vec<Building>, Vec<f64>) {
    let mut out = Vec::new();
    let mut halves = Vec::new();
    let mut push = |out: &mut Vec<Building>, btype: BuildingType, centroid: Point, allocation, env, half: f64| {
        let n = out.len() + 1;
        out.push(Building {
            building_id: format!("B{n:04}"),
            btype,
            zone_id: zone_of(&centroid),
            centroid,
            allocation,
            environment: env,
        });
        halves.push(half);
    };

    for _ in 0..362 {
        let mut p = location(rng, None);
        // thin out residential blocks in the downtown core
        if (p.x - 1000.0).abs() < 250.0 && (p.y - 1000.0).abs() < 250.0 && rng.gen_bool(0.7) {
            p = location(rng, None);
        }
        let bedrooms = rng.gen_range(1..=5u32);
        let area = 40.0 + 45.0 * bedrooms as f64 + rng.gen_range(0.0..60.0);
        let env = environment(rng, area);
        let alloc = Allocation::Residential {
            bedrooms,
            vacancy_rate: round3(rng.gen_range(0.0..0.15)),
        };
        push(
            &mut out,
            BuildingType::Residential,
            p,
            alloc,
            env,
            6.0 + bedrooms as f64,
        );
    }
    for _ in 0..60 {
        let p = location(rng, Some(450.0));
        let gfa = rng.gen_range(500.0..5000.0f64).round();
        let alloc = Allocation::Business {
            gross_floor_area: gfa,
            worker_density: round3(rng.gen_range(0.01..0.05)),
        };
        let env = environment(rng, gfa);
        push(&mut out, BuildingType::Business, p, alloc, env, 15.0);
    }
    for (btype, n, spread, cap) in [
        (BuildingType::Mercantile, 30, Some(500.0), (40.0f64, 200.0f64)),
        (BuildingType::PublicService, 16, Some(700.0), (30.0, 250.0)),
        (BuildingType::Assembly, 16, None, (50.0, 400.0)),
    ] {
        for _ in 0..n {
            let p = location(rng, spread);
            let capacity = rng.gen_range(cap.0..cap.1).round();
            let env = environment(rng, capacity * 4.0);
            push(&mut out, btype, p, Allocation::Capacity { capacity }, env, 12.0);
        }
    }
    for (level, n, cap) in [
        (SchoolLevel::Primary, 7, (150.0f64, 400.0f64)),
        (SchoolLevel::Middle, 4, (300.0, 600.0)),
        (SchoolLevel::High, 3, (500.0, 1000.0)),
        (SchoolLevel::College, 2, (800.0, 2000.0)),
    ] {
        for _ in 0..n {
            let p = location(rng, None);
            let capacity = rng.gen_range(cap.0..cap.1).round();
            let env = environment(rng, capacity * 6.0);
            let alloc = Allocation::Education {
                capacity,
                school_level: level,
            };
            push(&mut out, BuildingType::Education, p, alloc, env, 25.0);
        }
    }
    (out, halves)
}

fn demographics(rng: &mut ChaCha8Rng) -> (Vec<(String, [f64; 4])>, Vec<ZoneDemographics>) {
    let z = SIDE_M / ZONES_PER_SIDE as f64;
    let mut zones = Vec::new();
    let mut demo = Vec::new();
    for r in 0..ZONES_PER_SIDE {
        for c in 0..ZONES_PER_SIDE {
            let id = format!("Z{:02}", r * ZONES_PER_SIDE + c + 1);
            zones.push((
                id.clone(),
                [c as f64 * z, r as f64 * z, (c + 1) as f64 * z, (r + 1) as f64 * z],
            ));
            // older residents to the north-east, poverty near the centre
            let ne = (r + c) as f64 / (2.0 * (ZONES_PER_SIDE - 1) as f64);
            let centre = 1.0 - ((r as f64 - 1.5).abs() + (c as f64 - 1.5).abs()) / 3.0;
            let mut s = BTreeMap::new();
            let mut put = |k: &str, v: f64| {
                s.insert(format!("share_{k}"), round3(v.clamp(0.0, 1.0)));
            };
            put("over_65", 0.06 + 0.25 * ne + rng.gen_range(-0.03..0.03));
            put("under_5", rng.gen_range(0.03..0.09));
            put("below_poverty", 0.05 + 0.25 * centre + rng.gen_range(-0.03..0.03));
            put("disability", 0.08 + 0.08 * ne + rng.gen_range(-0.02..0.02));
            put("no_vehicle", 0.03 + 0.15 * centre + rng.gen_range(-0.02..0.02));
            put("school_primary", rng.gen_range(0.06..0.10));
            put("school_middle", rng.gen_range(0.03..0.05));
            put("school_high", rng.gen_range(0.03..0.05));
            put("school_college", rng.gen_range(0.02..0.08));
            demo.push(ZoneDemographics {
                zone_id: id,
                population: rng.gen_range(250..600),
                shares: s,
            });
        }
    }
    (zones, demo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Persona {
    Worker,
    NightWorker,
    Student,
    Retiree,
    AtHome,
}

impl Persona {
    fn as_str(self) -> &'static str {
        match self {
            Persona::Worker => "worker",
            Persona::NightWorker => "night_worker",
            Persona::Student => "student",
            Persona::Retiree => "retiree",
            Persona::AtHome => "at_home",
        }
    }
}

/// Builds a day span by span; durations are clipped at midnight.
struct Day {
    spans: Vec<(u32, u32, &'static str)>,
    t: u32,
}

impl Day {
    fn new() -> Self {
        Self {
            spans: Vec::new(),
            t: 0,
        }
    }

    fn add(&mut self, code: &'static str, minutes: u32) {
        let end = (self.t + minutes).min(DAY_MINUTES);
        if end > self.t {
            self.spans.push((self.t, end - self.t, code));
            self.t = end;
        }
    }

    fn until(&mut self, code: &'static str, clock: u32) {
        if clock > self.t {
            self.add(code, clock - self.t);
        }
    }
}

const SLEEP: &str = "010101";
const GROOM: &str = "010201";
const HEALTH_CARE: &str = "010301";
const EAT: &str = "110101";
const HOUSEWORK: &str = "020101";
const COOK: &str = "020201";
const WORK: &str = "050101";
const CLASS: &str = "060101";
const HOMEWORK: &str = "060301";
const SHOP: &str = "070101";
const MEDICAL: &str = "080401";
const ERRAND: &str = "090101";
const SOCIAL: &str = "120101";
const TV: &str = "120303";
const SPORT: &str = "130101";
const TRAVEL: &str = "180501";

fn diary_day(persona: Persona, rng: &mut ChaCha8Rng) -> Vec<(u32, u32, &'static str)> {
    let mut d = Day::new();
    let r = |rng: &mut ChaCha8Rng, lo: u32, hi: u32| rng.gen_range(lo..=hi);
    match persona {
        Persona::Worker => {
            let wake = r(rng, 345, 450);
            d.until(SLEEP, wake);
            d.add(GROOM, r(rng, 20, 45));
            d.add(EAT, r(rng, 10, 30));
            d.add(TRAVEL, r(rng, 15, 45));
            d.until(WORK, r(rng, 705, 750));
            d.add(EAT, r(rng, 30, 60));
            d.until(WORK, r(rng, 990, 1080));
            d.add(TRAVEL, r(rng, 15, 45));
            if rng.gen_bool(0.25) {
                d.add(SHOP, r(rng, 20, 60));
                d.add(TRAVEL, r(rng, 10, 20));
            }
            d.add(COOK, r(rng, 20, 60));
            d.add(EAT, r(rng, 20, 45));
            if rng.gen_bool(0.3) {
                d.add(SPORT, r(rng, 30, 90));
            }
            d.until(TV, r(rng, 1290, 1395));
            d.add(GROOM, r(rng, 10, 20));
            d.until(SLEEP, DAY_MINUTES);
        }
        Persona::NightWorker => {
            d.until(WORK, r(rng, 360, 420));
            d.add(TRAVEL, r(rng, 20, 40));
            d.add(EAT, r(rng, 15, 30));
            d.until(SLEEP, r(rng, 840, 900));
            d.add(GROOM, r(rng, 20, 40));
            d.add(HOUSEWORK, r(rng, 30, 90));
            d.add(EAT, r(rng, 20, 40));
            d.until(TV, r(rng, 1245, 1290));
            d.add(TRAVEL, r(rng, 20, 40));
            d.until(WORK, DAY_MINUTES);
        }
        Persona::Student => {
            let wake = r(rng, 375, 450);
            d.until(SLEEP, wake);
            d.add(GROOM, r(rng, 15, 30));
            d.add(EAT, r(rng, 10, 25));
            d.add(TRAVEL, r(rng, 10, 30));
            d.until(CLASS, r(rng, 690, 735));
            d.add(EAT, r(rng, 30, 45));
            d.until(CLASS, r(rng, 900, 960));
            d.add(TRAVEL, r(rng, 10, 30));
            if rng.gen_bool(0.4) {
                d.add(SPORT, r(rng, 45, 90));
            }
            d.add(HOMEWORK, r(rng, 45, 120));
            d.add(EAT, r(rng, 20, 40));
            d.until(TV, r(rng, 1275, 1365));
            d.until(SLEEP, DAY_MINUTES);
        }
        Persona::Retiree => {
            let wake = r(rng, 390, 510);
            d.until(SLEEP, wake);
            d.add(GROOM, r(rng, 20, 45));
            d.add(HEALTH_CARE, r(rng, 10, 30));
            d.add(EAT, r(rng, 20, 40));
            d.add(HOUSEWORK, r(rng, 45, 120));
            if rng.gen_bool(0.2) {
                d.add(TRAVEL, r(rng, 15, 30));
                d.add(MEDICAL, r(rng, 60, 150));
                d.add(TRAVEL, r(rng, 15, 30));
            } else if rng.gen_bool(0.5) {
                d.add(TRAVEL, r(rng, 10, 20));
                d.add(SHOP, r(rng, 30, 90));
                d.add(TRAVEL, r(rng, 10, 20));
            }
            d.until(EAT, r(rng, 720, 780));
            d.add(SOCIAL, r(rng, 60, 180));
            d.add(COOK, r(rng, 30, 60));
            d.add(EAT, r(rng, 30, 45));
            d.until(TV, r(rng, 1260, 1350));
            d.until(SLEEP, DAY_MINUTES);
        }
        Persona::AtHome => {
            let wake = r(rng, 390, 540);
            d.until(SLEEP, wake);
            d.add(GROOM, r(rng, 20, 40));
            d.add(EAT, r(rng, 20, 40));
            d.add(HOUSEWORK, r(rng, 60, 180));
            if rng.gen_bool(0.4) {
                d.add(TRAVEL, r(rng, 10, 20));
                d.add(ERRAND, r(rng, 20, 60));
                d.add(TRAVEL, r(rng, 10, 20));
            }
            d.until(EAT, r(rng, 720, 780));
            d.add(TV, r(rng, 60, 180));
            d.add(COOK, r(rng, 30, 60));
            d.add(EAT, r(rng, 30, 45));
            d.until(TV, r(rng, 1290, 1380));
            d.until(SLEEP, DAY_MINUTES);
        }
    }
    d.spans
}

fn diaries(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<(DiaryRecord, Persona)>> {
    let codes = ActivityCodeMap::atus_default();
    (0..n)
        .map(|i| {
            let persona = pick(
                rng,
                &[
                    (Persona::Worker, 0.48),
                    (Persona::NightWorker, 0.04),
                    (Persona::Student, 0.18),
                    (Persona::Retiree, 0.18),
                    (Persona::AtHome, 0.12),
                ],
            );
            let entries = diary_day(persona, rng)
                .into_iter()
                .map(|(start_min, duration_min, code)| DiaryEntry {
                    start_min,
                    duration_min,
                    code: Some(code.to_string()),
                    class: codes.classify(code),
                })
                .collect();
            let record = DiaryRecord {
                person_id: format!("P{:05}", i + 1),
                sample_weight: (rng.gen_range(0.5..1.5f64) * 100.0).round() / 100.0,
                entries,
                attributes: [("persona".to_string(), persona.as_str().to_string())]
                    .into_iter()
                    .collect(),
            };
            Ok((record, persona))
        })
        .collect()
}

/// GPS fixes every 10 minutes: at home, at work during work spans, moving
/// in a straight line while travelling, with a few metres of noise.
fn gps_trace(rng: &mut ChaCha8Rng, diary: &DiaryRecord, home: Point, work: Point) -> TimeLocationPath {
    let mut points = Vec::new();
    let mut at_work = false;
    for k in 0..(DAY_MINUTES / 10) {
        let t = k * 10;
        let e = diary
            .entries
            .iter()
            .find(|e| e.start_min <= t && t < e.end_min())
            .expect("diary covers the day");
        let code = e.code.as_deref().unwrap_or_default();
        let pos = if code == WORK {
            at_work = true;
            work
        } else if code == TRAVEL {
            let f = f64::from(t - e.start_min) / f64::from(e.duration_min);
            let (a, b) = if at_work { (work, home) } else { (home, work) };
            Point::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))
        } else {
            if at_work && code != EAT {
                at_work = false;
            }
            if at_work {
                work
            } else {
                home
            }
        };
        points.push(GpsFix {
            t_min: f64::from(t),
            position: Point::new(
                round1(pos.x + rng.gen_range(-8.0..8.0)),
                round1(pos.y + rng.gen_range(-8.0..8.0)),
            ),
        });
    }
    TimeLocationPath {
        person_id: diary.person_id.clone(),
        points,
    }
}

impl SyntheticCounty {
    pub fn generate(options: &SynthOptions) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let grid = GridSpec::new(0.0, 0.0, CELL_M, (SIDE_M / CELL_M) as usize, (SIDE_M / CELL_M) as usize)?;
        let (zones, demographics) = demographics(&mut rng);
        let (buildings, footprint_half) = buildings(&mut rng);
        let people = diaries(&mut rng, options.persons)?;

        let homes: Vec<&Building> = buildings
            .iter()
            .filter(|b| b.btype == BuildingType::Residential)
            .collect();
        let offices: Vec<&Building> = buildings.iter().filter(|b| b.btype == BuildingType::Business).collect();
        let mut gps = Vec::new();
        for (d, _) in people
            .iter()
            .filter(|(_, p)| *p == Persona::Worker)
            .take(options.gps_persons)
        {
            let home = homes[rng.gen_range(0..homes.len())].centroid;
            let work = offices[rng.gen_range(0..offices.len())].centroid;
            gps.push(gps_trace(&mut rng, d, home, work));
        }
        Ok(Self {
            grid,
            zones,
            demographics,
            buildings,
            footprint_half,
            diaries: people.into_iter().map(|(d, _)| d).collect(),
            gps,
        })
    }

    pub fn buildings_geojson(&self) -> Value {
        let features: Vec<Value> = self
            .buildings
            .iter()
            .zip(&self.footprint_half)
            .map(|(b, h)| {
                let c = b.centroid;
                let mut p = serde_json::Map::new();
                p.insert("building_id".into(), json!(b.building_id));
                p.insert("type".into(), json!(b.btype.as_str()));
                p.insert("zone_id".into(), json!(b.zone_id));
                match b.allocation {
                    Allocation::Residential { bedrooms, vacancy_rate } => {
                        p.insert("bedrooms".into(), json!(bedrooms));
                        p.insert("vacancy_rate".into(), json!(vacancy_rate));
                    }
                    Allocation::Business {
                        gross_floor_area,
                        worker_density,
                    } => {
                        p.insert("gross_floor_area".into(), json!(gross_floor_area));
                        p.insert("worker_density".into(), json!(worker_density));
                    }
                    Allocation::Capacity { capacity } => {
                        p.insert("capacity".into(), json!(capacity));
                    }
                    Allocation::Education { capacity, school_level } => {
                        p.insert("capacity".into(), json!(capacity));
                        p.insert("school_level".into(), json!(school_level.as_str()));
                    }
                }
                let e = &b.environment;
                p.insert("year_built".into(), json!(e.year_built));
                p.insert("floor_area_m2".into(), json!(e.floor_area_m2));
                p.insert("construction".into(), json!(e.construction.as_str()));
                p.insert("glazing".into(), json!(e.glazing.as_str()));
                p.insert("energy_structure".into(), json!(e.energy_structure.as_str()));
                json!({
                    "type": "Feature",
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": rect_coordinates(c.x - h, c.y - h, c.x + h, c.y + h),
                    },
                    "properties": p,
                })
            })
            .collect();
        json!({ "type": "FeatureCollection", "features": features })
    }

    pub fn zones_geojson(&self) -> Value {
        let features: Vec<Value> = self
            .zones
            .iter()
            .map(|(id, [x0, y0, x1, y1])| {
                json!({
                    "type": "Feature",
                    "geometry": { "type": "Polygon", "coordinates": rect_coordinates(*x0, *y0, *x1, *y1) },
                    "properties": { "zone_id": id },
                })
            })
            .collect();
        json!({ "type": "FeatureCollection", "features": features })
    }

    /// Project config pointing at the files written by [`Self::write_to`].
    pub fn config_toml(&self, seed: u64) -> String {
        let g = &self.grid;
        format!(
            r#"# Synthetic county: 2 km square, 16 zones, {buildings} buildings, {persons} diaries.
seed = {seed}

[inputs]
diaries = "diaries.csv"
buildings = "buildings.geojson"
demographics = "demographics.csv"
zones = "zones.geojson"
{gps}
[grid]
origin_x = {ox:?}
origin_y = {oy:?}
cell_size = {cs:?}
rows = {rows}
cols = {cols}

[fit]
smoothing = 0.0

[weights]
demographic = 0.4
activity = 0.35
building_env = 0.25

[render]
ramp = "ylorrd"
cell_px = 8
"#,
            gps = if self.gps.is_empty() { "" } else { "gps = \"gps.csv\"\n" },
            buildings = self.buildings.len(),
            persons = self.diaries.len(),
            ox = g.origin_x,
            oy = g.origin_y,
            cs = g.cell_size,
            rows = g.rows,
            cols = g.cols,
        )
    }

    /// Writes all input files plus `config.toml` into `dir`.
    pub fn write_to(&self, dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
            written.push(p);
            Ok(())
        };
        let mut buf = Vec::new();
        write_diaries(&self.diaries, &mut buf)?;
        put("diaries.csv", std::mem::take(&mut buf))?;
        write_demographics(&self.demographics, &mut buf)?;
        put("demographics.csv", std::mem::take(&mut buf))?;
        if !self.gps.is_empty() {
            write_gps(&self.gps, &mut buf)?;
            put("gps.csv", std::mem::take(&mut buf))?;
        }
        let pretty = |v: &Value| -> Result<Vec<u8>> {
            let mut b = serde_json::to_vec(v)?;
            b.push(b'\n');
            Ok(b)
        };
        put("buildings.geojson", pretty(&self.buildings_geojson())?)?;
        put("zones.geojson", pretty(&self.zones_geojson())?)?;
        put("config.toml", self.config_toml(seed).into_bytes())?;
        Ok(written)
    }
}

/// Directory of the bundled synthetic county inside this crate.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join("synthetic_county")
}

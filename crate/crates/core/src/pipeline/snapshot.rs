use std::collections::HashMap;
use std::io::BufReader;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::activity::{ActivityClass, NUM_CLASSES, STEPS};
use crate::error::{Error, Result};
use crate::geo::{paint_zones, rasterize, read_values_csv, write_values_csv, CellValues, RawLayer, Timestep};
use crate::ingest::{
    parse_buildings, parse_demographics, parse_diaries, parse_gps, parse_zones, BuildingReport, DiaryRecord, GpsReport,
    ParseReport, TimeLocationPath, Zone, ZoneDemographics,
};
use crate::mapping::{Building, BuildingType, OccupancyField};
use crate::markov::{MarkovActivityModel, TrajectoryMatrix};
use crate::pipeline::layout::open;
use crate::pipeline::{ActivityRanking, OutputLayout, ProjectConfig};
use crate::vri::{
    compose, rank_quintiles, rank_quintiles_per_step, rank_quintiles_pooled, score_activity, score_building_env,
    score_demographic, Aspect, AspectLayer, VRIWeights, VulnerabilityMap,
};

pub fn load_diaries(config: &ProjectConfig) -> Result<(Vec<DiaryRecord>, ParseReport)> {
    let path = config.resolve(&config.inputs.diaries);
    parse_diaries(BufReader::new(open(&path)?), &config.activity_codes)
}

pub fn load_buildings(config: &ProjectConfig) -> Result<(Vec<Building>, BuildingReport)> {
    let path = config.resolve(&config.inputs.buildings);
    parse_buildings(BufReader::new(open(&path)?))
}

pub fn load_demographics(config: &ProjectConfig) -> Result<Vec<ZoneDemographics>> {
    let path = config.resolve(&config.inputs.demographics);
    parse_demographics(BufReader::new(open(&path)?))
}

pub fn load_zones(config: &ProjectConfig) -> Result<Vec<Zone>> {
    let path = config.resolve(&config.inputs.zones);
    parse_zones(BufReader::new(open(&path)?))
}

pub fn load_gps(config: &ProjectConfig) -> Result<Option<(Vec<TimeLocationPath>, GpsReport)>> {
    config
        .inputs
        .gps
        .as_ref()
        .map(|p| parse_gps(BufReader::new(open(&config.resolve(p))?)))
        .transpose()
}

/// Community population: the configured value, else the zone total.
pub fn community_population(config: &ProjectConfig, demo: &[ZoneDemographics]) -> f64 {
    config
        .mapping
        .population
        .unwrap_or_else(|| demo.iter().map(|z| z.population as f64).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawLayers {
    pub demographic: RawLayer,
    pub activity: Vec<RawLayer>,
    pub building_env: RawLayer,
}

/// Ranked layers: two static aspects and one activity layer per step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AspectLayers {
    pub demographic: AspectLayer,
    pub activity: Vec<AspectLayer>,
    pub building_env: AspectLayer,
}

impl AspectLayers {
    /// The layer of `aspect`; `t` selects the activity step and is ignored
    /// for static aspects.
    pub fn layer(&self, aspect: Aspect, t: usize) -> Result<&AspectLayer> {
        match aspect {
            Aspect::Demographic => Ok(&self.demographic),
            Aspect::BuildingEnv => Ok(&self.building_env),
            Aspect::Activity => self.activity.get(t).ok_or(Error::MissingStep(t)),
        }
    }

    pub fn compose(&self, t: usize, weights: &VRIWeights) -> Result<VulnerabilityMap> {
        let a = self.layer(Aspect::Activity, t)?;
        compose([&self.demographic, a, &self.building_env], weights)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AssessReport {
    pub buildings: usize,
    pub buildings_outside_grid: usize,
    pub zones_scored: usize,
    pub demographic_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub raw: RawLayers,
    pub ranked: AspectLayers,
    pub report: AssessReport,
}

/// Scores, rasterizes and ranks the three aspects.
pub fn assess(
    config: &ProjectConfig,
    buildings: &[Building],
    demo: &[ZoneDemographics],
    zones: &[Zone],
    occ: &OccupancyField,
) -> Result<Assessment> {
    let grid = config.grid;
    let a = &config.assess;

    let zone_scores = score_demographic(demo, &config.demographic_weights)?;
    let demographic = paint_zones(zones, &zone_scores, &grid)?;

    let env = score_building_env(buildings, &config.env_weights);
    let env_points: Vec<(f64, f64, f64)> = buildings
        .iter()
        .zip(&env)
        .map(|(b, s)| (b.centroid.x, b.centroid.y, *s))
        .collect();
    let (building_env, env_report) = rasterize(&env_points, &grid, a.env_reducer)?;

    let by_id: HashMap<&str, &Building> = buildings.iter().map(|b| (b.building_id.as_str(), b)).collect();
    let centroids: Vec<(f64, f64)> = occ
        .building_ids()
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|b| (b.centroid.x, b.centroid.y))
                .ok_or_else(|| Error::invalid("occupancy", format!("building `{id}` not in inventory")))
        })
        .collect::<Result<_>>()?;
    let activity = (0..STEPS)
        .map(|t| {
            let scores = score_activity(occ, &config.activity_vulnerability, t, a.combine)?;
            let pts: Vec<_> = centroids.iter().zip(scores).map(|(&(x, y), s)| (x, y, s)).collect();
            Ok(rasterize(&pts, &grid, a.activity_reducer)?.0)
        })
        .collect::<Result<Vec<_>>>()?;

    let ranked = AspectLayers {
        demographic: rank_quintiles(&demographic, Aspect::Demographic, Timestep::Static)?,
        activity: match a.activity_ranking {
            ActivityRanking::Pooled => rank_quintiles_pooled(&activity)?,
            ActivityRanking::PerStep => rank_quintiles_per_step(&activity)?,
        },
        building_env: rank_quintiles(&building_env, Aspect::BuildingEnv, Timestep::Static)?,
    };
    let report = AssessReport {
        buildings: buildings.len(),
        buildings_outside_grid: env_report.out_of_bounds,
        zones_scored: zone_scores.len(),
        demographic_cells: demographic.data_count(),
    };
    Ok(Assessment {
        raw: RawLayers {
            demographic,
            activity,
            building_env,
        },
        ranked,
        report,
    })
}

/// Per-building state at one step, for inspection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildingStatus {
    pub building_id: String,
    pub btype: BuildingType,
    pub x: f64,
    pub y: f64,
    pub cell: Option<(usize, usize)>,
    pub occupancy: [f64; NUM_CLASSES],
    pub total: f64,
    pub activity_score: f64,
    pub env_score: f64,
}

/// Immutable bundle of everything the service reads.
#[derive(Debug, Clone)]
pub struct ScenarioSnapshot {
    pub config: ProjectConfig,
    pub buildings: Vec<Building>,
    pub model: MarkovActivityModel,
    pub trajectory: TrajectoryMatrix,
    pub occupancy: OccupancyField,
    pub raw: RawLayers,
    pub layers: AspectLayers,
    env_scores: HashMap<String, f64>,
    content_hash: String,
}

impl ScenarioSnapshot {
    pub fn new(
        config: ProjectConfig,
        buildings: Vec<Building>,
        model: MarkovActivityModel,
        trajectory: TrajectoryMatrix,
        occupancy: OccupancyField,
        assessment: Assessment,
    ) -> Result<Self> {
        let Assessment { raw, ranked, .. } = assessment;
        if ranked.activity.len() != STEPS || raw.activity.len() != STEPS {
            return Err(Error::InvalidLayer(format!("snapshot needs {STEPS} activity layers")));
        }
        for l in ranked
            .activity
            .iter()
            .chain([&ranked.demographic, &ranked.building_env])
        {
            config.grid.ensure_same(&l.grid)?;
        }
        let env_scores = buildings
            .iter()
            .zip(score_building_env(&buildings, &config.env_weights))
            .map(|(b, s)| (b.building_id.clone(), s))
            .collect();
        let mut snap = Self {
            config,
            buildings,
            model,
            trajectory,
            occupancy,
            raw,
            layers: ranked,
            env_scores,
            content_hash: String::new(),
        };
        snap.content_hash = snap.compute_hash()?;
        Ok(snap)
    }

    /// Rebuilds a snapshot from a pipeline output directory.
    pub fn load(config: &ProjectConfig, layout: &OutputLayout) -> Result<Self> {
        let need = |path: std::path::PathBuf, requires: &'static str| -> Result<std::fs::File> {
            if path.is_file() {
                open(&path)
            } else {
                Err(Error::MissingStage {
                    stage: "serve",
                    requires,
                    detail: format!("{} not found", path.display()),
                })
            }
        };
        let model = MarkovActivityModel::read_json(BufReader::new(need(layout.model(), "fit")?))?;
        let trajectory = TrajectoryMatrix::read_csv(BufReader::new(need(layout.trajectory(), "simulate")?))?;
        let (buildings, _) = load_buildings(config)?;
        let demo = load_demographics(config)?;
        let ids: Vec<String> = buildings.iter().map(|b| b.building_id.clone()).collect();
        let occupancy = OccupancyField::read_csv(
            BufReader::new(need(layout.occupancy(), "map")?),
            BufReader::new(need(layout.unplaced(), "map")?),
            ids,
            community_population(config, &demo),
        )?;

        let grid = config.grid;
        let read_raw = |a: Aspect, t: Timestep| -> Result<RawLayer> {
            let f = need(layout.raw_layer(a, t), "assess")?;
            RawLayer::new(grid, read_values_csv(BufReader::new(f), &grid)?)
        };
        let read_rank = |a: Aspect, t: Timestep| -> Result<AspectLayer> {
            let f = need(layout.layer(a, t), "assess")?;
            let ranks = read_values_csv(BufReader::new(f), &grid)?
                .into_iter()
                .map(|v| v.map(|v| v as u8))
                .collect();
            AspectLayer::new(grid, ranks, a, t)
        };
        let steps = || (0..STEPS).map(Timestep::Step);
        let raw = RawLayers {
            demographic: read_raw(Aspect::Demographic, Timestep::Static)?,
            activity: steps().map(|t| read_raw(Aspect::Activity, t)).collect::<Result<_>>()?,
            building_env: read_raw(Aspect::BuildingEnv, Timestep::Static)?,
        };
        let ranked = AspectLayers {
            demographic: read_rank(Aspect::Demographic, Timestep::Static)?,
            activity: steps().map(|t| read_rank(Aspect::Activity, t)).collect::<Result<_>>()?,
            building_env: read_rank(Aspect::BuildingEnv, Timestep::Static)?,
        };
        Self::new(
            config.clone(),
            buildings,
            model,
            trajectory,
            occupancy,
            Assessment {
                raw,
                ranked,
                report: AssessReport::default(),
            },
        )
    }

    /// SHA-256 over the serialized model, trajectory, occupancy and layers.
    pub fn content_hash(&self) -> &str {
        &self.content_hash
    }

    fn compute_hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        let mut section = |name: &str, bytes: Vec<u8>| {
            h.update(name.as_bytes());
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(&bytes);
        };
        let mut buf = Vec::new();
        self.model.write_json(&mut buf)?;
        section("model", std::mem::take(&mut buf));
        self.trajectory.write_csv(&mut buf)?;
        section("trajectory", std::mem::take(&mut buf));
        self.occupancy.write_csv(&mut buf)?;
        section("occupancy", std::mem::take(&mut buf));
        self.occupancy.write_unplaced_csv(&mut buf)?;
        section("unplaced", std::mem::take(&mut buf));
        let layers: Vec<(String, &dyn CellValues)> = [
            ("raw/demographic".to_string(), &self.raw.demographic as &dyn CellValues),
            ("raw/building_env".into(), &self.raw.building_env),
            ("demographic".into(), &self.layers.demographic),
            ("building_env".into(), &self.layers.building_env),
        ]
        .into_iter()
        .chain(
            self.raw
                .activity
                .iter()
                .enumerate()
                .map(|(t, l)| (format!("raw/activity/{t}"), l as &dyn CellValues)),
        )
        .chain(
            self.layers
                .activity
                .iter()
                .enumerate()
                .map(|(t, l)| (format!("activity/{t}"), l as &dyn CellValues)),
        )
        .collect();
        for (name, layer) in layers {
            write_values_csv(layer, &mut buf)?;
            section(&name, std::mem::take(&mut buf));
        }
        Ok(hex::encode(h.finalize()))
    }

    pub fn compose(&self, t: usize, weights: &VRIWeights) -> Result<VulnerabilityMap> {
        self.layers.compose(t, weights)
    }

    pub fn building_status(&self, t: usize) -> Result<Vec<BuildingStatus>> {
        let scores = score_activity(
            &self.occupancy,
            &self.config.activity_vulnerability,
            t,
            self.config.assess.combine,
        )?;
        let by_id: HashMap<&str, &Building> = self.buildings.iter().map(|b| (b.building_id.as_str(), b)).collect();
        Ok(self
            .occupancy
            .building_ids()
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let b = by_id[id.as_str()];
                let occupancy: [f64; NUM_CLASSES] = self.occupancy.cell(t, i).try_into().expect("NUM_CLASSES counts");
                BuildingStatus {
                    building_id: id.clone(),
                    btype: b.btype,
                    x: b.centroid.x,
                    y: b.centroid.y,
                    cell: self.config.grid.cell_of(&b.centroid),
                    total: occupancy.iter().sum(),
                    occupancy,
                    activity_score: scores[i],
                    env_score: self.env_scores[id.as_str()],
                }
            })
            .collect())
    }

    pub fn class_labels() -> Vec<&'static str> {
        ActivityClass::ALL.iter().map(|c| c.label()).collect()
    }
}

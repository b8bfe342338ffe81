use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::activity::{step_clock, STEPS};
use crate::error::{Error, Result};
use crate::geo::{
    legend, render, render_frames, temporal_sweep, write_cells_geojson, write_values_csv, CellValues, FrameEntry,
    SweepManifest, Timestep,
};
use crate::mapping::{allocate, join_gps, write_trajectories_csv, Building, OccupancyField};
use crate::markov::{aggregate, fit, propagate, sample, MarkovActivityModel, TrajectoryMatrix};
use crate::pipeline::layout::{open, write_with};
use crate::pipeline::snapshot::{
    assess, community_population, load_buildings, load_demographics, load_diaries, load_gps, load_zones, AspectLayers,
    Assessment,
};
use crate::pipeline::{OutputLayout, ProjectConfig, ScenarioSnapshot, SimulateMode};
use crate::vri::Aspect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Fit,
    Simulate,
    Map,
    Assess,
    Render,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Fit, Stage::Simulate, Stage::Map, Stage::Assess, Stage::Render];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Fit => "fit",
            Stage::Simulate => "simulate",
            Stage::Map => "map",
            Stage::Assess => "assess",
            Stage::Render => "render",
        }
    }

    /// Format version of the stage's outputs.
    pub fn version(self) -> u32 {
        1
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}` (fit, simulate, map, assess, render)")))
    }
}

/// Parses `fit,map` (or `all`) into stages in pipeline order.
pub fn parse_stages(list: &str) -> Result<Vec<Stage>> {
    if list.trim() == "all" {
        return Ok(Stage::ALL.to_vec());
    }
    let mut v = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Stage>>>()?;
    v.sort();
    v.dedup();
    if v.is_empty() {
        return Err(Error::Config("no stages given".into()));
    }
    Ok(v)
}

#[derive(Debug)]
pub struct PipelineRun {
    pub stages: Vec<Stage>,
    /// Files written by this run, in write order.
    pub written: Vec<PathBuf>,
    /// Present once the output directory holds everything through assess.
    pub snapshot: Option<ScenarioSnapshot>,
}

/// Artifacts produced so far in this run.
#[derive(Default)]
struct State {
    model: Option<MarkovActivityModel>,
    trajectory: Option<TrajectoryMatrix>,
    buildings: Option<Vec<Building>>,
    occupancy: Option<OccupancyField>,
    assessment: Option<Assessment>,
}

struct Runner<'a> {
    config: &'a ProjectConfig,
    layout: OutputLayout,
    written: Vec<PathBuf>,
    state: State,
}

fn missing(stage: Stage, requires: Stage, path: &Path) -> Error {
    Error::MissingStage {
        stage: stage.as_str(),
        requires: requires.as_str(),
        detail: format!("{} not found", path.display()),
    }
}

impl Runner<'_> {
    fn write(&mut self, path: PathBuf, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        write_with(&path, |w| f(w))?;
        self.written.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        self.write(path, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n").map_err(|e| Error::io("<json>", e))
        })
    }

    fn model(&mut self, stage: Stage) -> Result<MarkovActivityModel> {
        if let Some(m) = &self.state.model {
            return Ok(m.clone());
        }
        let p = self.layout.model();
        if !p.is_file() {
            return Err(missing(stage, Stage::Fit, &p));
        }
        MarkovActivityModel::read_json(BufReader::new(open(&p)?))
    }

    fn trajectory(&mut self, stage: Stage) -> Result<TrajectoryMatrix> {
        if let Some(t) = &self.state.trajectory {
            return Ok(t.clone());
        }
        let p = self.layout.trajectory();
        if !p.is_file() {
            return Err(missing(stage, Stage::Simulate, &p));
        }
        TrajectoryMatrix::read_csv(BufReader::new(open(&p)?))
    }

    fn buildings(&mut self) -> Result<Vec<Building>> {
        if self.state.buildings.is_none() {
            self.state.buildings = Some(load_buildings(self.config)?.0);
        }
        Ok(self.state.buildings.clone().expect("just loaded"))
    }

    fn occupancy(&mut self, stage: Stage) -> Result<OccupancyField> {
        if let Some(o) = &self.state.occupancy {
            return Ok(o.clone());
        }
        let (counts, unplaced) = (self.layout.occupancy(), self.layout.unplaced());
        for p in [&counts, &unplaced] {
            if !p.is_file() {
                return Err(missing(stage, Stage::Map, p));
            }
        }
        let ids = self.buildings()?.into_iter().map(|b| b.building_id).collect();
        let pop = community_population(self.config, &load_demographics(self.config)?);
        OccupancyField::read_csv(
            BufReader::new(open(&counts)?),
            BufReader::new(open(&unplaced)?),
            ids,
            pop,
        )
    }

    fn ranked(&mut self, stage: Stage) -> Result<AspectLayers> {
        if let Some(a) = &self.state.assessment {
            return Ok(a.ranked.clone());
        }
        let p = self.layout.layer(Aspect::Demographic, Timestep::Static);
        if !p.is_file() {
            return Err(missing(stage, Stage::Assess, &p));
        }
        Ok(ScenarioSnapshot::load(self.config, &self.layout)?.layers)
    }

    fn fit(&mut self) -> Result<()> {
        let (diaries, report) = load_diaries(self.config)?;
        let model = fit(&diaries, &self.config.fit)?;
        self.write(self.layout.model(), |w| model.write_json(w))?;
        self.write_json(self.layout.report("fit"), &report)?;
        self.state.model = Some(model);
        Ok(())
    }

    fn simulate(&mut self) -> Result<()> {
        let model = self.model(Stage::Simulate)?;
        let traj = match self.config.simulate.mode {
            SimulateMode::Propagate => propagate(&model),
            SimulateMode::Sample => aggregate(&sample(&model, self.config.simulate.samples, self.config.seed), None)?,
        };
        self.write(self.layout.trajectory(), |w| traj.write_csv(w))?;
        self.state.trajectory = Some(traj);
        Ok(())
    }

    fn map(&mut self) -> Result<()> {
        let traj = self.trajectory(Stage::Map)?;
        let (buildings, b_report) = load_buildings(self.config)?;
        let demo = load_demographics(self.config)?;
        let c = self.config;
        let occ = allocate(
            &traj,
            community_population(c, &demo),
            &buildings,
            &c.placement,
            &demo,
            &c.mapping.allocation_options(),
        )?;
        self.write(self.layout.occupancy(), |w| occ.write_csv(w))?;
        self.write(self.layout.unplaced(), |w| occ.write_unplaced_csv(w))?;

        let mut report = serde_json::json!({ "buildings": b_report });
        if let Some((paths, gps_report)) = load_gps(c)? {
            let joined = join_gps(&paths, &traj, &buildings, &c.placement, c.mapping.snap_radius_m)?;
            self.write(self.layout.gps_trajectories(), |w| write_trajectories_csv(&joined, w))?;
            report["gps"] = serde_json::to_value(gps_report)?;
        }
        self.write_json(self.layout.report("map"), &report)?;
        self.state.buildings = Some(buildings);
        self.state.occupancy = Some(occ);
        Ok(())
    }

    fn assess(&mut self) -> Result<()> {
        let occ = self.occupancy(Stage::Assess)?;
        let buildings = self.buildings()?;
        let demo = load_demographics(self.config)?;
        let zones = load_zones(self.config)?;
        let a = assess(self.config, &buildings, &demo, &zones, &occ)?;

        let l = self.layout.clone();
        let statics: [(Aspect, &dyn CellValues, &dyn CellValues); 2] = [
            (Aspect::Demographic, &a.raw.demographic, &a.ranked.demographic),
            (Aspect::BuildingEnv, &a.raw.building_env, &a.ranked.building_env),
        ];
        for (aspect, raw, ranked) in statics {
            self.write(l.raw_layer(aspect, Timestep::Static), |w| write_values_csv(raw, w))?;
            self.write(l.layer(aspect, Timestep::Static), |w| write_values_csv(ranked, w))?;
        }
        for t in 0..STEPS {
            let step = Timestep::Step(t);
            self.write(l.raw_layer(Aspect::Activity, step), |w| {
                write_values_csv(&a.raw.activity[t], w)
            })?;
            self.write(l.layer(Aspect::Activity, step), |w| {
                write_values_csv(&a.ranked.activity[t], w)
            })?;
        }
        self.write_json(l.report("assess"), &a.report)?;
        self.state.occupancy = Some(occ);
        self.state.assessment = Some(a);
        Ok(())
    }

    fn render(&mut self) -> Result<()> {
        let layers = self.ranked(Stage::Render)?;
        let c = self.config;
        let steps: Vec<usize> = c.render.timesteps.clone().unwrap_or_else(|| (0..STEPS).collect());
        let maps = temporal_sweep(
            &layers.demographic,
            &layers.activity,
            &layers.building_env,
            &c.weights,
            &steps,
        )?;
        let pngs = render_frames(&maps, &c.render.ramp, c.render.cell_px)?;
        let l = self.layout.clone();
        let mut frames = Vec::with_capacity(maps.len());
        for ((t, map), png) in steps.iter().zip(&maps).zip(pngs) {
            self.write(l.frame(*t, "csv"), |w| write_values_csv(map, w))?;
            self.write(l.frame(*t, "png"), |w| {
                w.write_all(&png).map_err(|e| Error::io("<png>", e))
            })?;
            self.write(l.frame(*t, "geojson"), |w| write_cells_geojson(map, w))?;
            let name = |ext| l.relative(&l.frame(*t, ext)).trim_start_matches("frames/").to_string();
            frames.push(FrameEntry {
                timestep: *t,
                clock: step_clock(*t),
                csv: name("csv"),
                png: name("png"),
                geojson: name("geojson"),
                mean_v: map.mean(),
            });
        }
        for layer in [&layers.demographic, &layers.building_env] {
            let png = render(layer, &c.render.ramp, c.render.cell_px)?.to_png()?;
            self.write(l.layer_png(layer.aspect), |w| {
                w.write_all(&png).map_err(|e| Error::io("<png>", e))
            })?;
        }
        if let Some(first) = maps.first() {
            self.write_json(l.legend(), &legend(first, &c.render.ramp)?)?;
        }
        let manifest = SweepManifest {
            weights: c.weights,
            ramp: c.render.ramp.clone(),
            grid: c.grid,
            frames,
        };
        self.write(l.sweep_manifest(), |w| manifest.write_json(w))?;
        Ok(())
    }
}

/// Runs `stages` in pipeline order, writing artifacts under `out_dir`.
/// Prerequisites not produced in this run are read back from `out_dir`.
pub fn run_pipeline(config: &ProjectConfig, stages: &[Stage], out_dir: &Path) -> Result<PipelineRun> {
    let mut stages = stages.to_vec();
    stages.sort();
    stages.dedup();
    let mut r = Runner {
        config,
        layout: OutputLayout::new(out_dir),
        written: Vec::new(),
        state: State::default(),
    };
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for stage in &stages {
        match stage {
            Stage::Fit => r.fit()?,
            Stage::Simulate => r.simulate()?,
            Stage::Map => r.map()?,
            Stage::Assess => r.assess()?,
            Stage::Render => r.render()?,
        }
    }
    write_run_manifest(config, &stages, &r.layout)?;
    r.written.push(r.layout.run_manifest());

    let snapshot = match (
        r.state.model,
        r.state.trajectory,
        r.state.buildings,
        r.state.occupancy,
        r.state.assessment,
    ) {
        (Some(m), Some(t), Some(b), Some(o), Some(a)) => Some(ScenarioSnapshot::new(config.clone(), b, m, t, o, a)?),
        _ if r.layout.layer(Aspect::Demographic, Timestep::Static).is_file() && r.layout.model().is_file() => {
            Some(ScenarioSnapshot::load(config, &r.layout)?)
        }
        _ => None,
    };
    Ok(PipelineRun {
        stages,
        written: r.written,
        snapshot,
    })
}

#[derive(Serialize)]
struct RunManifest {
    format: &'static str,
    tool_version: &'static str,
    config_sha256: String,
    seed: u64,
    stages: Vec<StageEntry>,
    inputs: BTreeMap<&'static str, String>,
    artifacts: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct StageEntry {
    stage: Stage,
    version: u32,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// `manifest.json`: config and input hashes plus the SHA-256 of every file
/// in the output directory. No timestamps, so reruns are byte-identical.
fn write_run_manifest(config: &ProjectConfig, stages: &[Stage], layout: &OutputLayout) -> Result<()> {
    let mut files = Vec::new();
    collect_files(layout.root(), &mut files)?;
    let manifest_path = layout.run_manifest();
    let artifacts = files
        .iter()
        .filter(|p| **p != manifest_path)
        .map(|p| Ok((layout.relative(p), sha256_file(p)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let inputs = config
        .input_files()
        .into_iter()
        .map(|(name, p)| Ok((name, sha256_file(&p)?)))
        .collect::<Result<_>>()?;
    let m = RunManifest {
        format: "cvri-run-manifest",
        tool_version: env!("CARGO_PKG_VERSION"),
        config_sha256: config.content_sha256(),
        seed: config.seed,
        stages: stages
            .iter()
            .map(|&stage| StageEntry {
                stage,
                version: stage.version(),
            })
            .collect(),
        inputs,
        artifacts,
    };
    write_with(&manifest_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &m)?;
        w.write_all(b"\n").map_err(|e| Error::io(&manifest_path, e))
    })
}

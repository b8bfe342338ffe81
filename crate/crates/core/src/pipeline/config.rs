use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::activity::{STEPS, STEP_MINUTES};
use crate::error::{Error, Result};
use crate::geo::{ramp, GridSpec, Reducer, DEFAULT_RAMP};
use crate::ingest::ActivityCodeMap;
use crate::mapping::{ActivityPlacementTable, AllocationOptions, CapacitySplit, DEFAULT_SNAP_RADIUS_M};
use crate::markov::FitOptions;
use crate::vri::{ActivityVulnerabilityTable, CombineMode, DemographicWeights, EnvWeights, VRIWeights};

/// Input files. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub diaries: PathBuf,
    pub buildings: PathBuf,
    pub demographics: PathBuf,
    pub zones: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gps: Option<PathBuf>,
}

/// The day grid is fixed; the section exists so a config states it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridConfig {
    pub steps: usize,
    pub step_minutes: u32,
}

impl Default for TimeGridConfig {
    fn default() -> Self {
        Self {
            steps: STEPS,
            step_minutes: STEP_MINUTES,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateMode {
    #[default]
    Propagate,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub mode: SimulateMode,
    /// Sequences drawn in `sample` mode.
    pub samples: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            mode: SimulateMode::Propagate,
            samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    pub capacity_split: CapacitySplit,
    pub snap_radius_m: f64,
    /// Community population; defaults to the sum of zone populations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<f64>,
}

impl MappingConfig {
    pub fn allocation_options(&self) -> AllocationOptions {
        AllocationOptions {
            capacity_split: self.capacity_split,
        }
    }
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            capacity_split: CapacitySplit::default(),
            snap_radius_m: DEFAULT_SNAP_RADIUS_M,
            population: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityRanking {
    /// One quintile reference over all 96 steps.
    #[default]
    Pooled,
    PerStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessConfig {
    pub combine: CombineMode,
    pub activity_ranking: ActivityRanking,
    pub activity_reducer: Reducer,
    pub env_reducer: Reducer,
}

impl Default for AssessConfig {
    fn default() -> Self {
        Self {
            combine: CombineMode::Geometric,
            activity_ranking: ActivityRanking::Pooled,
            activity_reducer: Reducer::Sum,
            env_reducer: Reducer::Mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub ramp: String,
    /// Pixels per cell edge.
    pub cell_px: u32,
    /// Steps to render; all 96 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timesteps: Option<Vec<usize>>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            ramp: DEFAULT_RAMP.into(),
            cell_px: 8,
            timesteps: None,
        }
    }
}

fn default_seed() -> u64 {
    42
}

/// Everything a pipeline run needs, loaded from one TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub inputs: InputPaths,
    pub grid: GridSpec,
    #[serde(default)]
    pub time_grid: TimeGridConfig,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub mapping: MappingConfig,
    #[serde(default)]
    pub assess: AssessConfig,
    #[serde(default)]
    pub weights: VRIWeights,
    #[serde(default)]
    pub render: RenderConfig,
    #[serde(default = "ActivityCodeMap::atus_default")]
    pub activity_codes: ActivityCodeMap,
    #[serde(default)]
    pub placement: ActivityPlacementTable,
    #[serde(default)]
    pub activity_vulnerability: ActivityVulnerabilityTable,
    #[serde(default)]
    pub demographic_weights: DemographicWeights,
    #[serde(default)]
    pub env_weights: EnvWeights,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl ProjectConfig {
    /// Reads, resolves and validates a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_grid != TimeGridConfig::default() {
            return Err(Error::Config(format!(
                "time_grid must be {STEPS} steps of {STEP_MINUTES} minutes"
            )));
        }
        self.grid.validate()?;
        if !(self.fit.smoothing.is_finite() && self.fit.smoothing >= 0.0) {
            return Err(Error::Config("fit.smoothing must be >= 0".into()));
        }
        if self.simulate.samples == 0 {
            return Err(Error::Config("simulate.samples must be >= 1".into()));
        }
        if !(self.mapping.snap_radius_m.is_finite() && self.mapping.snap_radius_m > 0.0) {
            return Err(Error::Config("mapping.snap_radius_m must be > 0".into()));
        }
        if let Some(p) = self.mapping.population {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::Config("mapping.population must be >= 0".into()));
            }
        }
        self.env_weights.validate()?;
        if self.demographic_weights.0.values().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config("demographic_weights must be non-negative".into()));
        }
        ramp(&self.render.ramp)?;
        if self.render.cell_px == 0 {
            return Err(Error::Config("render.cell_px must be >= 1".into()));
        }
        if let Some(ts) = &self.render.timesteps {
            if let Some(t) = ts.iter().find(|t| **t >= STEPS) {
                return Err(Error::Config(format!(
                    "render.timesteps contains {t}, outside 0..{STEPS}"
                )));
            }
        }
        for (name, p) in self.input_files() {
            if !p.is_file() {
                return Err(Error::Config(format!("{name} file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// `(name, resolved path)` for every configured input.
    pub fn input_files(&self) -> Vec<(&'static str, PathBuf)> {
        let i = &self.inputs;
        let mut v = vec![
            ("diaries", self.resolve(&i.diaries)),
            ("buildings", self.resolve(&i.buildings)),
            ("demographics", self.resolve(&i.demographics)),
            ("zones", self.resolve(&i.zones)),
        ];
        if let Some(g) = &i.gps {
            v.push(("gps", self.resolve(g)));
        }
        v
    }

    /// SHA-256 of the canonical JSON form of the config (paths as written).
    pub fn content_sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

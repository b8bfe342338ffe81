//! Config-driven pipeline: fit, simulate, map, assess, render.

mod config;
mod layout;
mod run;
mod snapshot;

pub use config::{
    ActivityRanking, AssessConfig, InputPaths, MappingConfig, ProjectConfig, RenderConfig, SimulateConfig,
    SimulateMode, TimeGridConfig,
};
pub use layout::OutputLayout;
pub use run::{parse_stages, run_pipeline, PipelineRun, Stage};
pub use snapshot::{
    assess, community_population, load_buildings, load_demographics, load_diaries, load_gps, load_zones, AspectLayers,
    AssessReport, Assessment, BuildingStatus, RawLayers, ScenarioSnapshot,
};

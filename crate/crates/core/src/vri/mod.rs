//! Aspect scoring, quintile ranking and the composite rating.

mod compose;
mod rank;
mod score;
mod tables;

pub use compose::{compose, weighted_rank, VulnerabilityMap};
pub use rank::{quintile_ranks, rank_quintiles, rank_quintiles_per_step, rank_quintiles_pooled, Aspect, AspectLayer};
pub use score::{
    construction_score, energy_score, env_attribute_scores, glazing_score, score_activity, score_building_env,
    score_demographic, AGE_REFERENCE_YEAR, AGE_SPAN_YEARS,
};
pub use tables::{
    ActivityVulnerabilityTable, CombineMode, DemographicWeights, EnvWeights, Rating, VRIWeights, WEIGHT_SUM_TOLERANCE,
};

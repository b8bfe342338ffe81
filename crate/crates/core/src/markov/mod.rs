//! Time-indexed first-order Markov chain over the eight activity classes on
//! the 96-slot day grid: discretization, fitting, propagation, sampling and
//! aggregation into the community trajectory matrix.

mod discretize;
mod fit;
mod model;
mod occurrence;
mod simulate;
mod trajectory;

pub use discretize::{discretize, ActivitySequence};
pub use fit::{fit, fit_sequences, FitOptions};
pub use model::{
    identity_matrix, one_hot, MarkovActivityModel, ModelProvenance, TransitionMatrix, MODEL_FORMAT,
    MODEL_FORMAT_VERSION, STOCHASTIC_TOLERANCE, TRANSITIONS,
};
pub use occurrence::normalize_occurrence;
pub use simulate::{aggregate, propagate, sample};
pub use trajectory::{OccurrenceMatrix, TrajectoryMatrix, ROW_SUM_TOLERANCE};

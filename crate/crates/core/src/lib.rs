pub mod activity;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod mapping;
pub mod markov;
pub mod pipeline;
pub mod service;
pub mod synth;
pub mod vri;

pub use error::{Error, Result};

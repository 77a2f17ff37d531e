//! People counting from radar range-azimuth cubes: a rule-based
//! connected-component counter, feature-based baselines, evaluation
//! metrics, a threshold tuner and a synthetic scene generator.

pub mod baselines;
pub mod cube;
pub mod dataset;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod preprocess;
pub mod rulecc;
pub mod stats;
pub mod synth;
pub mod tuner;

pub use error::{Error, Result};

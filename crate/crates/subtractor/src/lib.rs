//! Configuration, parallel execution and result files for the photon
//! subtraction simulator in `subtractor-core`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod runner;

pub use config::{parse_config, Experiment, Overrides, Preset};
pub use error::RunError;
pub use runner::{run_experiment, Row};

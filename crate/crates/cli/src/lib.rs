//! Library surface of the twpa-studio CLI: configuration loading and the
//! command implementations, exposed so integration tests can drive them
//! directly.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod commands;
pub mod config;

pub use config::ExperimentConfig;

//! Experiment driver: TOML configs, run directories and SVG figures.

pub mod cases;
pub mod config;
pub mod experiment;
pub mod output;
pub mod plot;
pub mod pool;
pub mod summary;

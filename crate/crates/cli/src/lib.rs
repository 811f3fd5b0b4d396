//! Experiment runner: config parsing, presets, orchestration, and
//! machine-readable reports for the perturbative open-system simulator.

pub mod config;
pub mod experiment;
pub mod presets;
pub mod report;

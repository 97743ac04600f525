//! Experiment runner for the `lab-core` laboratory: presets, configuration
//! and artifact output.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod presets;
pub mod report;
pub mod svg;

pub use config::ExperimentConfig;
pub use error::LabError;
pub use presets::{catalogue, execute, Preset};
pub use report::{Check, Status, Summary};

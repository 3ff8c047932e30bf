//! Experiment harness for the kkboundary layouts: algorithm dispatch,
//! budgeted sweeps with CSV output and energy races.

pub mod algo;
pub mod config;
pub mod experiment;
pub mod labels;
pub mod race;

pub use algo::{run_algorithm, Algorithm, RunSettings};
pub use config::{parse_config, read_config, ConfigError};
pub use experiment::{run_experiment, run_on, ExperimentConfig, NamedTopology, ResultTable, Row};
pub use race::{energy_race, RaceResult};

//! Experiment driver for the CCN-DART simulator: parameter sweeps, their
//! comparison, and the scripted walkthrough scenarios.

pub mod compare;
pub mod config;
pub mod error;
pub mod run;
pub mod scenario;

pub use compare::{cmd_compare, Comparison};
pub use config::ExperimentConfig;
pub use error::LabError;
pub use run::{cmd_run, run_config, Cell, RunOptions, RunSummary};
pub use scenario::{cmd_scenario, run_scenario, ScenarioOptions, ScenarioReport};

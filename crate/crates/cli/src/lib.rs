//! Instance generators, the experiment runner and the `satpath` command line.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod report;

pub use error::HarnessError;
pub use experiment::{execute, run_experiment, ExperimentConfig, ExperimentKind, RunReport, SeedRecord};
pub use generate::{named_game, random_kstep, random_normal_form, random_stochastic, NamedGame};

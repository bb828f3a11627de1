//! Experiment driver: configuration, Monte Carlo trials, exact audits, file
//! formats and reports on top of `gapforge-core`.

pub mod config;
pub mod io;
pub mod report;
pub mod trial;

pub use config::{Check, ConfigError, ExperimentConfig, FamilyKind, ModeSpec, Overrides};
pub use trial::{knabe_subgraph_audit, monte_carlo, run_trial, verify_ff_exact, HarnessError, Report, TrialResult};

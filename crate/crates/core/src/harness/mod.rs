//! Monte-Carlo experiments: configuration, trials, rate fits and output
//! artifacts.

pub mod check;
pub mod config;
mod monte_carlo;
pub mod output;
mod rate;
pub mod regression_study;

pub use check::{run_checks, CheckOutcome};
pub use config::{ExperimentConfig, Resolved};
pub use monte_carlo::{
    run_monte_carlo, run_trial, run_trial_detailed, ErrorReport, LadderPoint, SampleStats,
    TrialOutcome,
};
pub use output::{emit_outputs, read_csv, CsvRow, OutputPaths};
pub use rate::{fit_loglog, fit_rate, log_theory_order, LogLogFit, RateFit};
pub use regression_study::{run_regression_study, RegressionReport, RegressionStudyConfig};

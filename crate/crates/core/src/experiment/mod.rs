//! JSON-configured Monte Carlo experiments over a ladder of `n`.
//!
//! [`run_experiment`] expands `φ`, classifies the regime, fixes the
//! normalization and the limiting variance, then for every `n` simulates
//! the replications, builds `Y_n` (and `Z_n` on request) on the time grid
//! and runs the enabled statistics. Verdicts always name the tolerance
//! they were judged against.

mod config;
mod report;
mod run;

pub use config::{ExperimentConfig, FunctionSource, NormalizationChoice, Statistics, Tolerances};
pub use report::{
    ConvergenceReport, ExpansionSummary, LadderRow, Manifest, Target, TargetSource, Verdict,
};
pub use run::{limiting_variance, resolve_normalization, run_experiment, tightness_spread, ExperimentOutput, RunOptions};

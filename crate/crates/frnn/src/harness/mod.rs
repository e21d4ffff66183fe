//! Experiment layer behind the `frnn` command line: configuration files,
//! the four run modes and their CSV/JSON outputs.
//!
//! Every fitness value here is measured against the problem's analytic
//! solution, so the optimizer runs are oracle-guided tuning studies rather
//! than blind solves.

mod config;
mod report;
mod runs;

pub use config::{
    DerivativeKind, ExperimentConfig, OptimizerSection, OutputSection, Seeds, SolverSection, SweepSection,
};
pub use report::{ReportEntry, RunReport};
pub use runs::{resolve_output_dir, run_derivative_bench, run_optimize, run_solve, run_sweep, Command};

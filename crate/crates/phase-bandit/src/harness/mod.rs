//! Experiment runner: seeded parallel sweeps over (policy, d, n, r, scale)
//! grids, CSV emission and SVG regret plots.
//!
//! Determinism contract: a config fully determines every random stream, so
//! repeated runs produce byte-identical CSV output regardless of worker
//! count or execution order. The `PHASE_BANDIT_WORKERS` environment variable
//! overrides the worker count.

mod config;
mod csvio;
mod plot;
mod runner;

pub use config::{ExperimentConfig, PolicyKind, RadiusMode};
pub use csvio::{emit_csv, parse_csv, summary_to_csv_string, CsvRow};
pub use plot::{emit_plot, render_svg, PlotOptions};
pub use runner::{
    fit_summary_scaling, run_experiment, sweep_and_fit, Axis, CellStats, Metric, RegretSummary,
    SummaryCell, WORKERS_ENV,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("failed to {op} {path}: {source}")]
    Io {
        op: &'static str,
        path: String,
        source: std::io::Error,
    },
    #[error("CSV parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
    #[error("all grid cells were skipped (infeasible radii)")]
    EmptySweep,
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error(transparent)]
    Policy(#[from] crate::policies::PolicyError),
    #[error(transparent)]
    Estimator(#[from] crate::estimator::EstimatorError),
    #[error(transparent)]
    Core(#[from] crate::core::CoreError),
}

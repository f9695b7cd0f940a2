//! Benchmark harness for `loomsched`: experiment grids, timed and
//! cross-checked kernel runs, derived speedup metrics and CSV/JSON reports.

pub mod bench;
pub mod config;
pub mod metrics;
pub mod report;
pub mod run;

pub use bench::{BenchKernel, BfsBench, SpmvBench, SynthBench};
pub use config::{build_grid, default_grid, default_threads, App, ExperimentConfig, GraphSource, InputSpec};
pub use metrics::{epsilon_sensitivity, speedup, worst_stealing, MetricError};
pub use report::{emit_report, read_report, Format, MetricRow, Report, RunRow};
pub use run::{run_cells, run_experiment, BenchRecord, CellFlag, ExperimentOutcome, FlaggedCell};

use loomsched::kernels::KernelError;
use loomsched::workloads::WorkloadError;
use loomsched::PolicyError;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("input not found: {}", .0.display())]
    InputNotFound(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no records to report")]
    EmptyReport,
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

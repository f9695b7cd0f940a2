//! Benchmark inputs: synthetic cost arrays, random graphs and sparse matrices.

pub mod cache;
mod graph;
mod mtx;
mod spin;
mod synth;

pub use graph::{gen_scale_free_graph, gen_uniform_graph, Graph, GraphKind};
pub use mtx::{read_matrix_market, row_stats, write_matrix_market, CsrMatrix, RowStats};
pub use spin::{ns_per_unit, spin_work};
pub use synth::{gen_exponential_workload, gen_linear_workload, Distribution, Order, WorkloadSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("structural invariant violated: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Loop bodies driven through the scheduler.

mod bfs;
mod spmv;
mod synth;

pub use bfs::{bfs, BfsResult, UNREACHED};
pub use spmv::spmv;
pub use synth::{serial_checksum, synth_kernel};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("vector length {got} does not match matrix columns {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("source vertex {vertex} outside [0, {vertex_count})")]
    SourceOutOfRange { vertex: usize, vertex_count: usize },
}

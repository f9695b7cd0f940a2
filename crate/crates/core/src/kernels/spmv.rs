use super::KernelError;
use crate::scheduler::LoopScheduler;
use crate::workloads::CsrMatrix;
use std::sync::atomic::{AtomicU64, Ordering};

/// `y = m·x` with one loop iteration per row. Each row is summed serially
/// in column order, so the result is bit-identical under every schedule.
pub fn spmv(m: &CsrMatrix, x: &[f64], sched: &LoopScheduler) -> Result<Vec<f64>, KernelError> {
    if x.len() != m.cols() {
        return Err(KernelError::DimensionMismatch { expected: m.cols(), got: x.len() });
    }
    // rows are written by exactly one iteration; atomics avoid aliasing a &mut
    let y: Vec<AtomicU64> = (0..m.rows()).map(|_| AtomicU64::new(0)).collect();
    sched.run(m.rows(), |i| {
        let (cols, vals) = m.row(i);
        let mut acc = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            acc += v * x[c];
        }
        y[i].store(acc.to_bits(), Ordering::Relaxed);
    });
    Ok(y.into_iter().map(|v| f64::from_bits(v.into_inner())).collect())
}

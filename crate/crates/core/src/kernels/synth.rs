use crate::scheduler::LoopScheduler;
use crate::workloads::{spin_work, WorkloadSpec};
use std::hint::black_box;
use std::sync::atomic::{AtomicU64, Ordering};

/// Spin for `costs[i]` units at every iteration and fold `i` into a wrapping
/// sum, which no schedule can change.
pub fn synth_kernel(spec: &WorkloadSpec, sched: &LoopScheduler) -> u64 {
    let checksum = AtomicU64::new(0);
    sched.run(spec.costs.len(), |i| {
        black_box(spin_work(spec.costs[i]));
        checksum.fetch_add(i as u64, Ordering::Relaxed);
    });
    checksum.into_inner()
}

pub fn serial_checksum(n: usize) -> u64 {
    (0..n as u64).fold(0u64, |acc, i| acc.wrapping_add(i))
}

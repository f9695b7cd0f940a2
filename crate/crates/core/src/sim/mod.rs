//! Single-threaded oracles: running statistics, a virtual-time replay of
//! every policy, and an exhaustive interleaving checker for the work-stealing
//! queue protocol.

mod exhaustive;
mod simulate;
mod stats;

pub use exhaustive::{
    check_with_timing, exhaustive_small_check, exhaustive_small_check_with, CheckReport, Mutation,
    Timing, Violation, ViolationKind,
};
pub use simulate::{
    simulate, write_trace, DivisorCause, DivisorStep, SimEvent, SimEventKind, SimOutcome,
};
pub use stats::RunningStats;

use crate::scheduler::PolicyError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("at least one worker is required")]
    NoThreads,
    #[error("iteration {index} has zero cost")]
    ZeroCost { index: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

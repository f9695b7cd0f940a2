//! Loop self-scheduling for irregular workloads.
//!
//! The crate is organised around [`scheduler::parallel_for`], a fork-join
//! loop driver that accepts one of five [`Policy`] values:
//!
//! * `Static` block partitioning,
//! * `Dynamic` fixed-size chunks from a shared counter,
//! * `Guided` shrinking chunks from a shared counter,
//! * `Stealing` per-thread queues with fixed chunks and half-queue steals,
//! * `Ich` per-thread queues whose chunk divisor adapts to how far a
//!   thread's completed-iteration count sits from the all-thread mean.
//!
//! Around the scheduler live the benchmark inputs ([`workloads`]), the loop
//! bodies that exercise it ([`kernels`]) and a single-threaded simulator and
//! protocol model checker ([`sim`]) used as a test oracle.

pub mod kernels;
pub mod scheduler;
pub mod sim;
pub mod workloads;

pub use scheduler::{
    parallel_for, IterationRange, LoadClass, LoopScheduler, LoopStats, Polarity, Policy,
    PolicyError, PolicyKind,
};

//! Per-worker queue descriptors and the THE protocol.
//!
//! A queue is the half-open interval `[begin, end)` of unclaimed iterations.
//! The owner takes chunks from the front, thieves take halves from the back.
//! The owner's fast path advances `begin` without the lock and rolls back if
//! it crossed `end`; thieves always hold the queue lock and roll `end` back if
//! their lowered `end` crossed `begin`. Both sides publish their store before
//! reading the other index (sequentially consistent store/load pairs), so at
//! least one of two racing parties observes the conflict.

use super::adapt::{averaged_count, averaged_divisor};
use super::range::IterationRange;
use super::shared::static_partition;
use crossbeam_utils::CachePadded;
use rand::Rng;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering::*};
use std::sync::{Mutex, MutexGuard};

#[derive(Debug)]
pub struct WorkerState {
    id: usize,
    begin: AtomicUsize,
    end: AtomicUsize,
    lock: Mutex<()>,
    /// Completed iterations, the basis of load classification.
    k: AtomicU64,
    /// Chunk divisor.
    d: AtomicUsize,
    initial_len: usize,
    pub(crate) counters: WorkerCounters,
}

#[derive(Debug, Default)]
pub(crate) struct WorkerCounters {
    pub executed: AtomicU64,
    pub chunks: AtomicU64,
    pub steal_attempts: AtomicU64,
    pub steal_successes: AtomicU64,
    pub adapt_low: AtomicU64,
    pub adapt_normal: AtomicU64,
    pub adapt_high: AtomicU64,
}

/// Build one queue per worker holding its contiguous block of `[0, n)`.
///
/// Every worker starts with `k = 0` and `d = p` (clamped to `[1, n]`), so its
/// first chunk is about `n / p²` iterations.
pub fn init_queues(n: usize, p: usize) -> Vec<CachePadded<WorkerState>> {
    let p = p.max(1);
    let d = p.min(n.max(1));
    (0..p)
        .map(|i| {
            let r = static_partition(n, p, i);
            CachePadded::new(WorkerState::with_bounds(i, r.begin, r.end, d))
        })
        .collect()
}

/// Uniformly random worker index other than `thief_id`. Requires `p >= 2`.
pub fn select_victim<R: Rng + ?Sized>(thief_id: usize, p: usize, rng: &mut R) -> usize {
    debug_assert!(p >= 2, "stealing needs at least two workers");
    let r = rng.gen_range(0..p - 1);
    if r >= thief_id {
        r + 1
    } else {
        r
    }
}

impl WorkerState {
    pub fn with_bounds(id: usize, begin: usize, end: usize, d: usize) -> Self {
        WorkerState {
            id,
            begin: AtomicUsize::new(begin),
            end: AtomicUsize::new(end),
            lock: Mutex::new(()),
            k: AtomicU64::new(0),
            d: AtomicUsize::new(d.max(1)),
            initial_len: end.saturating_sub(begin),
            counters: WorkerCounters::default(),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn initial_len(&self) -> usize {
        self.initial_len
    }

    /// Current `[begin, end)` snapshot. Only meaningful at quiescent points.
    pub fn bounds(&self) -> IterationRange {
        let begin = self.begin.load(SeqCst);
        let end = self.end.load(SeqCst);
        IterationRange::new(begin.min(end), end)
    }

    /// Unclaimed iterations; 0 while an optimistic claim has overshot `end`.
    pub fn remaining(&self) -> usize {
        self.end.load(SeqCst).saturating_sub(self.begin.load(SeqCst))
    }

    pub fn k(&self) -> u64 {
        self.k.load(Relaxed)
    }

    pub fn d(&self) -> usize {
        self.d.load(Relaxed)
    }

    pub(crate) fn set_d(&self, d: usize) {
        self.d.store(d.max(1), Relaxed);
    }

    pub(crate) fn set_k(&self, k: u64) {
        self.k.store(k, Relaxed);
    }

    /// Owner-only: record a finished chunk of `len` iterations.
    pub(crate) fn add_completed(&self, len: usize) {
        // k has a single writer between steals
        self.k.store(self.k.load(Relaxed) + len as u64, Relaxed);
        self.counters.executed.fetch_add(len as u64, Relaxed);
        self.counters.chunks.fetch_add(1, Relaxed);
    }

    fn guard(&self) -> MutexGuard<'_, ()> {
        // the guarded data is `()`, so a poisoned lock carries no broken state
        self.lock.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Owner-only: claim up to `chunk` iterations from the front.
    pub fn try_local_work(&self, chunk: usize) -> Option<IterationRange> {
        debug_assert!(chunk >= 1);
        // the owner is the only writer of `begin`
        let begin = self.begin.load(Relaxed);
        let advanced = begin + chunk;
        self.begin.store(advanced, SeqCst);
        if advanced < self.end.load(SeqCst) {
            return Some(IterationRange::new(begin, advanced));
        }
        self.begin.store(begin, SeqCst);

        let _g = self.guard();
        let begin = self.begin.load(SeqCst);
        let end = self.end.load(SeqCst);
        if begin < end {
            let take = chunk.min(end - begin);
            self.begin.store(begin + take, SeqCst);
            Some(IterationRange::new(begin, begin + take))
        } else {
            None
        }
    }

    /// Thief side: detach the back half of this (victim's) queue.
    ///
    /// Returns `None` when the queue holds fewer than two iterations or the
    /// lowered `end` crossed the owner's `begin`, in which case `end` is
    /// restored.
    pub fn split_back_half(&self) -> Option<IterationRange> {
        if self.end.load(SeqCst) <= self.begin.load(SeqCst) {
            return None;
        }
        let _g = self.guard();
        let end = self.end.load(SeqCst);
        let half = end.saturating_sub(self.begin.load(SeqCst)) / 2;
        if half == 0 {
            return None;
        }
        let lowered = end - half;
        self.end.store(lowered, SeqCst);
        if lowered <= self.begin.load(SeqCst) {
            self.end.store(end, SeqCst);
            return None;
        }
        Some(IterationRange::new(lowered, end))
    }

    /// Replace this worker's (empty) queue with `range`.
    pub(crate) fn install(&self, range: IterationRange) {
        let _g = self.guard();
        self.end.store(range.end, SeqCst);
        self.begin.store(range.begin, SeqCst);
    }

    /// Steal half of `victim`'s queue into `self`.
    ///
    /// With `average` set the thief adopts the floor averages of its own and
    /// the victim's `d` and `k`. The victim's `d` and `k` are never touched.
    pub fn steal_from(&self, victim: &WorkerState, average: bool) -> Option<IterationRange> {
        debug_assert_ne!(self.id, victim.id);
        self.counters.steal_attempts.fetch_add(1, Relaxed);
        let stolen = victim.split_back_half()?;
        if average {
            self.set_d(averaged_divisor(self.d(), victim.d()));
            self.set_k(averaged_count(self.k(), victim.k()));
        }
        self.install(stolen);
        self.counters.steal_successes.fetch_add(1, Relaxed);
        Some(stolen)
    }
}

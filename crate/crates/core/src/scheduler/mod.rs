//! The `parallel_for` engine and its building blocks.

mod adapt;
mod pin;
mod policy;
mod range;
mod shared;
mod worker;

pub use adapt::{
    adapt_divisor, averaged_count, averaged_divisor, classify_load, next_chunk_size, LoadClass,
};
pub use pin::pin_current_thread;
pub use policy::{Polarity, Policy, PolicyError, PolicyKind};
pub use range::IterationRange;
pub use shared::{dynamic_next, guided_next, static_partition};
pub use worker::{init_queues, select_victim, WorkerState};

use crossbeam_utils::CachePadded;
use rand::rngs::SmallRng;
use rand::SeedableRng;
use std::any::Any;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

/// Per-worker diagnostics collected during one loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorkerStats {
    pub initial_len: usize,
    pub executed: u64,
    pub chunks: u64,
    pub steal_attempts: u64,
    pub steal_successes: u64,
    pub adapt_low: u64,
    pub adapt_normal: u64,
    pub adapt_high: u64,
    pub final_d: usize,
    pub final_k: u64,
}

/// Diagnostics for one `parallel_for` call, readable after it returns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoopStats {
    pub iterations: usize,
    pub workers: Vec<WorkerStats>,
}

impl LoopStats {
    pub fn steal_attempts(&self) -> u64 {
        self.workers.iter().map(|w| w.steal_attempts).sum()
    }

    pub fn steal_successes(&self) -> u64 {
        self.workers.iter().map(|w| w.steal_successes).sum()
    }

    pub fn chunks(&self) -> u64 {
        self.workers.iter().map(|w| w.chunks).sum()
    }

    pub fn final_divisors(&self) -> Vec<usize> {
        self.workers.iter().map(|w| w.final_d).collect()
    }
}

/// A configured loop driver: policy, thread count, pinning and the seed of
/// the thieves' victim streams.
#[derive(Debug, Clone)]
pub struct LoopScheduler {
    policy: Policy,
    threads: usize,
    pin: bool,
    seed: u64,
}

/// Run `body(i)` exactly once for every `i` in `[0, n)` on `threads` workers.
pub fn parallel_for<F>(n: usize, policy: Policy, threads: usize, body: F) -> Result<LoopStats, PolicyError>
where
    F: Fn(usize) + Sync,
{
    Ok(LoopScheduler::new(policy, threads)?.run(n, body))
}

enum Failure<E> {
    Error(E),
    Panic(Box<dyn Any + Send>),
}

struct Shared<'a, E, F> {
    n: usize,
    p: usize,
    policy: Policy,
    body: &'a F,
    queues: Vec<CachePadded<WorkerState>>,
    counter: CachePadded<AtomicUsize>,
    completed: CachePadded<AtomicUsize>,
    abort: AtomicBool,
    failure: Mutex<Option<Failure<E>>>,
}

impl LoopScheduler {
    pub fn new(policy: Policy, threads: usize) -> Result<Self, PolicyError> {
        if threads == 0 {
            return Err(PolicyError::NoThreads);
        }
        Ok(LoopScheduler {
            policy: policy.validated()?,
            threads,
            pin: false,
            seed: 0x5eed_1c4e,
        })
    }

    pub fn pin(mut self, on: bool) -> Self {
        self.pin = on;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn run<F>(&self, n: usize, body: F) -> LoopStats
    where
        F: Fn(usize) + Sync,
    {
        match self.try_run(n, |i| {
            body(i);
            Ok::<(), std::convert::Infallible>(())
        }) {
            Ok(stats) => stats,
            Err(never) => match never {},
        }
    }

    /// Like [`run`](Self::run) for a fallible body. The first error (or
    /// panic) stops further dispatch; it is returned or resumed once every
    /// worker has quiesced.
    pub fn try_run<E, F>(&self, n: usize, body: F) -> Result<LoopStats, E>
    where
        E: Send,
        F: Fn(usize) -> Result<(), E> + Sync,
    {
        let p = self.threads;
        let shared = Shared {
            n,
            p,
            policy: self.policy,
            body: &body,
            queues: if self.policy.uses_local_queues() {
                init_queues(n, p)
            } else {
                init_queues(0, p)
            },
            counter: CachePadded::new(AtomicUsize::new(0)),
            completed: CachePadded::new(AtomicUsize::new(0)),
            abort: AtomicBool::new(false),
            failure: Mutex::new(None),
        };
        if n > 0 {
            std::thread::scope(|s| {
                for id in 0..p {
                    let shared = &shared;
                    let pin = self.pin;
                    let seed = self.seed;
                    s.spawn(move || {
                        if pin {
                            pin_current_thread(id);
                        }
                        shared.worker_loop(id, seed);
                    });
                }
            });
        }
        let failure = shared.failure.lock().unwrap_or_else(|e| e.into_inner()).take();
        match failure {
            Some(Failure::Error(e)) => return Err(e),
            Some(Failure::Panic(payload)) => panic::resume_unwind(payload),
            None => {}
        }
        Ok(shared.stats())
    }
}

impl<E, F> Shared<'_, E, F>
where
    E: Send,
    F: Fn(usize) -> Result<(), E> + Sync,
{
    fn aborted(&self) -> bool {
        self.abort.load(Ordering::Relaxed)
    }

    fn fail(&self, failure: Failure<E>) {
        let mut slot = self.failure.lock().unwrap_or_else(|e| e.into_inner());
        if slot.is_none() {
            *slot = Some(failure);
        }
        self.abort.store(true, Ordering::Relaxed);
    }

    /// Run the body over `range`; false once the loop has been aborted.
    fn execute(&self, range: IterationRange) -> bool {
        for i in range.iter() {
            if self.aborted() {
                return false;
            }
            match panic::catch_unwind(AssertUnwindSafe(|| (self.body)(i))) {
                Ok(Ok(())) => {}
                Ok(Err(e)) => {
                    self.fail(Failure::Error(e));
                    return false;
                }
                Err(payload) => {
                    self.fail(Failure::Panic(payload));
                    return false;
                }
            }
        }
        true
    }

    fn worker_loop(&self, id: usize, seed: u64) {
        let me = &*self.queues[id];
        let run = |r: IterationRange| {
            let ok = self.execute(r);
            if ok {
                me.add_completed(r.len());
            }
            ok
        };
        match self.policy {
            Policy::Static => {
                let r = static_partition(self.n, self.p, id);
                if !r.is_empty() {
                    run(r);
                }
            }
            Policy::Dynamic { chunk } => {
                while let Some(r) = dynamic_next(&self.counter, chunk, self.n) {
                    if !run(r) {
                        break;
                    }
                }
            }
            Policy::Guided { min_chunk } => {
                while let Some(r) = guided_next(&self.counter, min_chunk, self.n, self.p) {
                    if !run(r) {
                        break;
                    }
                }
            }
            Policy::Stealing { .. } | Policy::Ich { .. } => self.stealing_loop(id, seed),
        }
    }

    fn stealing_loop(&self, id: usize, seed: u64) {
        let me = &*self.queues[id];
        let mut rng = SmallRng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let adaptive = matches!(self.policy, Policy::Ich { .. });
        let max_d = self.n.max(1);
        loop {
            // local phase
            loop {
                // An unlocked read can see a thief's transiently lowered `end`
                // and report an empty queue, so emptiness is only decided by
                // the locked path inside `try_local_work`.
                let chunk = match self.policy {
                    Policy::Stealing { chunk } => chunk,
                    _ => next_chunk_size(me.remaining(), me.d()).max(1),
                };
                let Some(range) = me.try_local_work(chunk) else {
                    break;
                };
                if !self.execute(range) {
                    return;
                }
                me.add_completed(range.len());
                self.completed.fetch_add(range.len(), Ordering::Release);
                if let Policy::Ich { epsilon, polarity } = self.policy {
                    self.adapt(me, epsilon, polarity, max_d);
                }
            }
            // steal phase
            if self.p == 1 {
                return;
            }
            let mut failures = 0usize;
            loop {
                if self.aborted() || self.completed.load(Ordering::Acquire) >= self.n {
                    return;
                }
                let victim = select_victim(id, self.p, &mut rng);
                if me.steal_from(&self.queues[victim], adaptive).is_some() {
                    break;
                }
                failures += 1;
                backoff(failures, self.p);
            }
        }
    }

    fn adapt(&self, me: &WorkerState, epsilon: f64, polarity: Polarity, max_d: usize) {
        let ks: Vec<u64> = self.queues.iter().map(|w| w.k()).collect();
        let class = classify_load(me.k(), &ks, epsilon);
        let c = &me.counters;
        match class {
            LoadClass::Low => c.adapt_low.fetch_add(1, Ordering::Relaxed),
            LoadClass::Normal => c.adapt_normal.fetch_add(1, Ordering::Relaxed),
            LoadClass::High => c.adapt_high.fetch_add(1, Ordering::Relaxed),
        };
        me.set_d(adapt_divisor(me.d(), class, polarity, max_d));
    }

    fn stats(&self) -> LoopStats {
        let workers = self
            .queues
            .iter()
            .enumerate()
            .map(|(id, w)| {
                let c = &w.counters;
                let ld = |a: &std::sync::atomic::AtomicU64| a.load(Ordering::Relaxed);
                WorkerStats {
                    initial_len: if self.policy.uses_local_queues() {
                        w.initial_len()
                    } else if self.policy == Policy::Static {
                        static_partition(self.n, self.p, id).len()
                    } else {
                        0
                    },
                    executed: ld(&c.executed),
                    chunks: ld(&c.chunks),
                    steal_attempts: ld(&c.steal_attempts),
                    steal_successes: ld(&c.steal_successes),
                    adapt_low: ld(&c.adapt_low),
                    adapt_normal: ld(&c.adapt_normal),
                    adapt_high: ld(&c.adapt_high),
                    final_d: w.d(),
                    final_k: w.k(),
                }
            })
            .collect();
        LoopStats { iterations: self.n, workers }
    }
}

/// Spin, then yield after `p` consecutive misses, then sleep with a capped
/// exponential delay once misses pass `4p`.
fn backoff(failures: usize, p: usize) {
    if failures <= p {
        std::hint::spin_loop();
    } else if failures <= 4 * p {
        std::thread::yield_now();
    } else {
        let exp = ((failures - 4 * p) / p).min(7) as u32;
        std::thread::sleep(Duration::from_micros(1 << exp));
    }
}

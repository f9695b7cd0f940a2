use super::SimError;
use crate::scheduler::{
    adapt_divisor, averaged_count, averaged_divisor, classify_load, next_chunk_size,
    select_victim, static_partition, IterationRange, LoadClass, Policy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::{self, Write};

/// What happened in one simulated step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimEventKind {
    Dispatch,
    Complete,
    Adapt {
        class: LoadClass,
        old_d: usize,
        new_d: usize,
        /// Every worker's completed count at the moment of classification.
        k_snapshot: Vec<u64>,
    },
    StealAttempt {
        victim: usize,
    },
    StealSuccess {
        victim: usize,
        victim_d: usize,
        victim_k: u64,
        old_d: usize,
        old_k: u64,
    },
    Exit,
}

/// One record of the simulated timeline. `d` and `k` are the worker's
/// values after the event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimEvent {
    pub time: u64,
    pub worker: usize,
    pub kind: SimEventKind,
    pub range: Option<IterationRange>,
    pub d: usize,
    pub k: u64,
}

/// Why a worker's divisor changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisorCause {
    Adapt(LoadClass),
    Steal { victim_d: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisorStep {
    pub time: u64,
    pub from: usize,
    pub to: usize,
    pub cause: DivisorCause,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub makespan: u64,
    pub per_worker_k: Vec<u64>,
    /// Sum of the costs of the iterations each worker executed.
    pub per_worker_cost: Vec<u64>,
    /// Divisor history per worker; empty for policies without a divisor.
    pub per_worker_d_trace: Vec<Vec<DivisorStep>>,
    pub events: Vec<SimEvent>,
}

impl SimOutcome {
    /// How many times each iteration was dispatched.
    pub fn coverage(&self, n: usize) -> Vec<u32> {
        let mut hits = vec![0u32; n];
        for e in &self.events {
            if e.kind == SimEventKind::Dispatch {
                if let Some(r) = e.range {
                    for i in r.iter() {
                        hits[i] += 1;
                    }
                }
            }
        }
        hits
    }

    pub fn adapt_events(&self) -> impl Iterator<Item = &SimEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, SimEventKind::Adapt { .. }))
    }
}

#[derive(Debug, Clone, Default)]
struct SimWorker {
    begin: usize,
    end: usize,
    k: u64,
    d: usize,
    running: Option<IterationRange>,
    static_done: bool,
    parked: bool,
    exited: bool,
    cost: u64,
}

struct Sim<'a> {
    costs: &'a [u64],
    p: usize,
    policy: Policy,
    now: u64,
    counter: usize,
    workers: Vec<SimWorker>,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Reverse<(u64, usize)>>,
    events: Vec<SimEvent>,
    traces: Vec<Vec<DivisorStep>>,
    makespan: u64,
}

/// Replay a loop over `costs` on `p` virtual workers under `policy`.
///
/// Iteration `i` occupies its worker for `costs[i]` time units; all
/// scheduling decisions are free. Victim choices come from a ChaCha stream
/// seeded by `seed`, so the result is a pure function of the arguments.
pub fn simulate(costs: &[u64], p: usize, policy: &Policy, seed: u64) -> Result<SimOutcome, SimError> {
    if p == 0 {
        return Err(SimError::NoThreads);
    }
    let policy = policy.validated()?;
    if let Some(index) = costs.iter().position(|&c| c == 0) {
        return Err(SimError::ZeroCost { index });
    }
    let n = costs.len();
    let d0 = p.min(n.max(1));
    let workers = (0..p)
        .map(|i| {
            let r = if policy.uses_local_queues() {
                static_partition(n, p, i)
            } else {
                IterationRange::new(0, 0)
            };
            SimWorker {
                begin: r.begin,
                end: r.end,
                d: d0,
                ..SimWorker::default()
            }
        })
        .collect();
    let mut sim = Sim {
        costs,
        p,
        policy,
        now: 0,
        counter: 0,
        workers,
        rng: ChaCha8Rng::seed_from_u64(seed),
        heap: BinaryHeap::new(),
        events: Vec::new(),
        traces: vec![Vec::new(); p],
        makespan: 0,
    };
    sim.run();
    Ok(SimOutcome {
        makespan: sim.makespan,
        per_worker_k: sim.workers.iter().map(|w| w.k).collect(),
        per_worker_cost: sim.workers.iter().map(|w| w.cost).collect(),
        per_worker_d_trace: sim.traces,
        events: sim.events,
    })
}

impl Sim<'_> {
    fn n(&self) -> usize {
        self.costs.len()
    }

    fn run(&mut self) {
        for w in 0..self.p {
            self.dispatch(w);
        }
        while let Some(Reverse((t, w))) = self.heap.pop() {
            self.now = t;
            self.complete(w);
            self.dispatch(w);
            for u in 0..self.p {
                if self.workers[u].parked {
                    self.dispatch(u);
                }
            }
        }
        for u in 0..self.p {
            if !self.workers[u].exited {
                self.exit(u);
            }
        }
        debug_assert!(self.workers.iter().all(|w| w.begin >= w.end));
    }

    fn emit(&mut self, worker: usize, kind: SimEventKind, range: Option<IterationRange>) {
        let w = &self.workers[worker];
        self.events.push(SimEvent {
            time: self.now,
            worker,
            kind,
            range,
            d: w.d,
            k: w.k,
        });
    }

    fn start(&mut self, w: usize, range: IterationRange) {
        let cost: u64 = self.costs[range.begin..range.end].iter().sum();
        self.workers[w].running = Some(range);
        self.workers[w].parked = false;
        self.heap.push(Reverse((self.now + cost, w)));
        self.emit(w, SimEventKind::Dispatch, Some(range));
    }

    fn exit(&mut self, w: usize) {
        self.workers[w].parked = false;
        self.workers[w].exited = true;
        self.emit(w, SimEventKind::Exit, None);
    }

    fn complete(&mut self, w: usize) {
        let range = self.workers[w].running.take().expect("completion without a running chunk");
        let cost: u64 = self.costs[range.begin..range.end].iter().sum();
        self.makespan = self.makespan.max(self.now);
        let me = &mut self.workers[w];
        me.cost += cost;
        me.k += range.len() as u64;
        self.emit(w, SimEventKind::Complete, Some(range));
        if let Policy::Ich { epsilon, polarity } = self.policy {
            let k_snapshot: Vec<u64> = self.workers.iter().map(|x| x.k).collect();
            let class = classify_load(self.workers[w].k, &k_snapshot, epsilon);
            let old_d = self.workers[w].d;
            let new_d = adapt_divisor(old_d, class, polarity, self.n().max(1));
            self.workers[w].d = new_d;
            self.traces[w].push(DivisorStep {
                time: self.now,
                from: old_d,
                to: new_d,
                cause: DivisorCause::Adapt(class),
            });
            self.emit(w, SimEventKind::Adapt { class, old_d, new_d, k_snapshot }, None);
        }
    }

    fn dispatch(&mut self, w: usize) {
        if self.workers[w].exited {
            return;
        }
        let n = self.n();
        match self.policy {
            Policy::Static => {
                let first = !self.workers[w].static_done;
                self.workers[w].static_done = true;
                let r = static_partition(n, self.p, w);
                if first && !r.is_empty() {
                    self.start(w, r);
                } else {
                    self.exit(w);
                }
            }
            Policy::Dynamic { chunk } => {
                if self.counter >= n {
                    self.exit(w);
                } else {
                    let r = IterationRange::new(self.counter, (self.counter + chunk).min(n));
                    self.counter = r.end;
                    self.start(w, r);
                }
            }
            Policy::Guided { min_chunk } => {
                if self.counter >= n {
                    self.exit(w);
                } else {
                    let remaining = n - self.counter;
                    let grant = (remaining / self.p).max(min_chunk).min(remaining);
                    let r = IterationRange::new(self.counter, self.counter + grant);
                    self.counter = r.end;
                    self.start(w, r);
                }
            }
            Policy::Stealing { .. } | Policy::Ich { .. } => self.dispatch_local(w),
        }
    }

    fn dispatch_local(&mut self, w: usize) {
        loop {
            let me = &mut self.workers[w];
            let remaining = me.end - me.begin;
            if remaining > 0 {
                let chunk = match self.policy {
                    Policy::Stealing { chunk } => chunk,
                    _ => next_chunk_size(remaining, me.d),
                };
                let take = chunk.min(remaining);
                let r = IterationRange::new(me.begin, me.begin + take);
                me.begin += take;
                self.start(w, r);
                return;
            }
            if self.p == 1 || self.workers.iter().all(|x| x.begin >= x.end) {
                self.exit(w);
                return;
            }
            let mut stolen = false;
            for _ in 0..2 * self.p {
                let v = select_victim(w, self.p, &mut self.rng);
                self.emit(w, SimEventKind::StealAttempt { victim: v }, None);
                if self.steal(w, v) {
                    stolen = true;
                    break;
                }
            }
            if !stolen {
                self.workers[w].parked = true;
                return;
            }
        }
    }

    fn steal(&mut self, thief: usize, victim: usize) -> bool {
        let v = &mut self.workers[victim];
        let half = (v.end - v.begin) / 2;
        if half == 0 {
            return false;
        }
        let range = IterationRange::new(v.end - half, v.end);
        v.end -= half;
        let (victim_d, victim_k) = (v.d, v.k);
        let me = &mut self.workers[thief];
        let (old_d, old_k) = (me.d, me.k);
        me.begin = range.begin;
        me.end = range.end;
        if matches!(self.policy, Policy::Ich { .. }) {
            me.d = averaged_divisor(old_d, victim_d);
            me.k = averaged_count(old_k, victim_k);
            let to = me.d;
            self.traces[thief].push(DivisorStep {
                time: self.now,
                from: old_d,
                to,
                cause: DivisorCause::Steal { victim_d },
            });
        }
        self.emit(
            thief,
            SimEventKind::StealSuccess { victim, victim_d, victim_k, old_d, old_k },
            Some(range),
        );
        true
    }
}

impl fmt::Display for SimEventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimEventKind::Dispatch => f.write_str("dispatch"),
            SimEventKind::Complete => f.write_str("complete"),
            SimEventKind::Adapt { class, old_d, new_d, .. } => {
                let c = match class {
                    LoadClass::Low => "low",
                    LoadClass::Normal => "normal",
                    LoadClass::High => "high",
                };
                write!(f, "adapt:{c}:{old_d}->{new_d}")
            }
            SimEventKind::StealAttempt { victim } => write!(f, "steal-attempt:{victim}"),
            SimEventKind::StealSuccess { victim, .. } => write!(f, "steal-success:{victim}"),
            SimEventKind::Exit => f.write_str("exit"),
        }
    }
}

/// Write one tab-separated line per event: time, worker, kind, range, d, k.
pub fn write_trace<W: Write>(events: &[SimEvent], mut out: W) -> io::Result<()> {
    writeln!(out, "time\tworker\tkind\trange\td\tk")?;
    for e in events {
        let range = e.range.map_or_else(|| "-".to_string(), |r| r.to_string());
        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", e.time, e.worker, e.kind, range, e.d, e.k)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::Polarity;
    use proptest::prelude::*;

    fn all_policies() -> Vec<Policy> {
        vec![
            Policy::Static,
            Policy::Dynamic { chunk: 2 },
            Policy::Guided { min_chunk: 1 },
            Policy::Stealing { chunk: 1 },
            Policy::Stealing { chunk: 3 },
            Policy::Ich { epsilon: 0.25, polarity: Polarity::FastGrows },
            Policy::Ich { epsilon: 0.5, polarity: Polarity::FastShrinks },
        ]
    }

    /// Per-thread costs summing to 18, 16 and 12 over nine iterations each.
    fn three_thread_blocks() -> Vec<u64> {
        let mut c = vec![2u64; 9];
        c.extend([2, 2, 2, 2, 2, 2, 2, 1, 1]);
        c.extend([1, 1, 1, 2, 1, 2, 1, 2, 1]);
        c
    }

    #[test]
    fn fastest_worker_moves_divisor_on_first_completion() {
        let costs = three_thread_blocks();
        assert_eq!(costs[..9].iter().sum::<u64>(), 18);
        assert_eq!(costs[9..18].iter().sum::<u64>(), 16);
        assert_eq!(costs[18..].iter().sum::<u64>(), 12);
        for (polarity, expected) in [(Polarity::FastGrows, 1), (Polarity::FastShrinks, 6)] {
            let out = simulate(&costs, 3, &Policy::Ich { epsilon: 0.25, polarity }, 1).unwrap();
            let first_dispatches: Vec<_> = out
                .events
                .iter()
                .filter(|e| e.kind == SimEventKind::Dispatch && e.time == 0)
                .map(|e| e.range.unwrap().len())
                .collect();
            assert_eq!(first_dispatches, vec![3, 3, 3]);
            let first = out.adapt_events().next().unwrap();
            assert_eq!(first.worker, 2);
            assert_eq!(first.time, 3);
            match &first.kind {
                SimEventKind::Adapt { class, old_d, new_d, .. } => {
                    assert_eq!(*class, LoadClass::High);
                    assert_eq!(*old_d, 3);
                    assert_eq!(*new_d, expected);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn serial_makespan_is_total_cost() {
        let costs: Vec<u64> = (1..=20).collect();
        for policy in all_policies() {
            let out = simulate(&costs, 1, &policy, 3).unwrap();
            assert_eq!(out.makespan, costs.iter().sum::<u64>(), "{policy}");
        }
    }

    #[test]
    fn empty_loop() {
        for policy in all_policies() {
            let out = simulate(&[], 3, &policy, 0).unwrap();
            assert_eq!(out.makespan, 0);
            assert!(out.events.iter().all(|e| e.kind == SimEventKind::Exit));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(simulate(&[1], 0, &Policy::Static, 0), Err(SimError::NoThreads));
        assert_eq!(
            simulate(&[1, 0], 2, &Policy::Static, 0),
            Err(SimError::ZeroCost { index: 1 })
        );
        assert!(simulate(&[1], 2, &Policy::Dynamic { chunk: 0 }, 0).is_err());
    }

    #[test]
    fn trace_lines() {
        let out = simulate(&[1, 1, 1, 1], 2, &Policy::Stealing { chunk: 1 }, 0).unwrap();
        let mut buf = Vec::new();
        write_trace(&out.events, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), out.events.len() + 1);
        assert_eq!(lines[1], "0\t0\tdispatch\t[0,1)\t2\t0");
        assert!(lines.iter().skip(1).all(|l| l.split('\t').count() == 6));
    }

    fn check_outcome(costs: &[u64], p: usize, policy: &Policy, out: &SimOutcome) -> Result<(), TestCaseError> {
        let n = costs.len();
        prop_assert!(out.coverage(n).iter().all(|&h| h == 1));
        prop_assert_eq!(out.per_worker_cost.iter().sum::<u64>(), costs.iter().sum::<u64>());
        let total: u64 = costs.iter().sum();
        let max = costs.iter().copied().max().unwrap_or(0);
        prop_assert!(out.makespan * p as u64 >= total);
        prop_assert!(out.makespan >= max);
        for w in 0..p {
            let mine: Vec<_> = out.events.iter().filter(|e| e.worker == w).collect();
            prop_assert!(mine.windows(2).all(|x| x[0].time <= x[1].time));
            let mut running = false;
            for e in &mine {
                match e.kind {
                    SimEventKind::Dispatch => {
                        prop_assert!(!running);
                        running = true;
                    }
                    SimEventKind::Complete => {
                        prop_assert!(running);
                        running = false;
                    }
                    _ => {}
                }
            }
            prop_assert!(matches!(mine.last().map(|e| &e.kind), Some(SimEventKind::Exit)));
        }
        if let Policy::Ich { .. } = policy {
            for trace in &out.per_worker_d_trace {
                for s in trace {
                    prop_assert!(s.to >= 1 && s.to <= n.max(1));
                }
            }
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn every_policy_covers_each_iteration_once(
            costs in prop::collection::vec(1u64..20, 0..120),
            p in 1usize..6,
            seed in any::<u64>(),
        ) {
            for policy in all_policies() {
                let out = simulate(&costs, p, &policy, seed).unwrap();
                check_outcome(&costs, p, &policy, &out)?;
                let again = simulate(&costs, p, &policy, seed).unwrap();
                prop_assert_eq!(&out.events, &again.events);
            }
        }
    }
}

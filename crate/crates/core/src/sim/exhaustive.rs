//! Exhaustive interleaving check of the split-queue protocol on tiny inputs.
//!
//! Each worker runs a step machine mirroring the owner fast path (advance
//! `begin`, re-read `end`, roll back and retry under the lock) and the thief
//! path (pre-check, lock, read, lower `end`, re-check `begin`, restore or
//! install). Every shared-memory access is its own step and every victim
//! choice is branched on. A depth-first search over the deduplicated state
//! space reports the first trace that loses or repeats an iteration or
//! breaks a queue invariant.
//!
//! Two timing models are searched. Under [`Timing::Virtual`] a chunk runs
//! for its cost in clock units and only workers acting at the same instant
//! interleave. Under [`Timing::Free`] a running chunk may finish before or
//! after any other step, which covers every possible timing at once.
//!
//! Visited states are kept as 64-bit fingerprints.
//!
//! A thief whose attempts on every peer failed parks until some worker makes
//! progress (claims, steals, installs or completes work). No retry before
//! then could observe a different queue state.

use crate::scheduler::{
    adapt_divisor, averaged_count, averaged_divisor, classify_load, next_chunk_size,
    static_partition, Policy,
};
use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::fmt;

const MAX_N: usize = 16;
const MAX_P: usize = 4;
const STATE_LIMIT: usize = 50_000_000;

/// Deliberate protocol bugs used to confirm the checker can see failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mutation {
    #[default]
    None,
    /// A thief that sees the lowered `end` cross `begin` keeps the stolen
    /// range instead of restoring `end` and giving up.
    StealSkipsAbort,
    /// A thief gives up on a crossed split but leaves `end` lowered.
    StealSkipsRollback,
    /// The owner leaves `begin` advanced after losing the fast-path race.
    OwnerSkipsRollback,
}

/// How chunk execution is ordered against other steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Timing {
    Virtual,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    Duplicate { iteration: usize },
    Missing { iteration: usize },
    QueueInverted { worker: usize, begin: usize, end: usize },
    DivisorOutOfRange { worker: usize, d: usize },
    ChunkBound { worker: usize, len: usize },
    Stuck,
    TooLarge,
    StateLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub timing: Timing,
    /// The steps that led to the violation, one per line.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub passed: bool,
    pub states: usize,
    pub terminal_states: usize,
    pub violation: Option<Violation>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:?} ({:?} timing)", self.kind, self.timing)?;
        for line in &self.trace {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Pc {
    Start,
    Advance { chunk: u8 },
    CheckEnd { b: u8, chunk: u8 },
    Rollback { b: u8, chunk: u8 },
    Lock { chunk: u8 },
    LockedClaim { chunk: u8 },
    Exec { begin: u8, end: u8, until: u16 },
    StealSelect,
    StealPre { v: u8 },
    StealLock { v: u8 },
    StealReadEnd { v: u8 },
    StealReadBegin { v: u8, end: u8 },
    StealLower { v: u8, end: u8, half: u8 },
    StealCheck { v: u8, end: u8, half: u8 },
    Install { v: u8, begin: u8, end: u8 },
    Parked,
    Exited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Mw {
    begin: u8,
    end: u8,
    k: u8,
    d: u8,
    locked: bool,
    failed: u8,
    pc: Pc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Model {
    now: u16,
    counter: u8,
    completed: u8,
    claimed: u16,
    done: u16,
    w: [Mw; MAX_P],
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Tick(u16),
    Step { w: u8, pc: Pc, victim: Option<u8> },
}

/// Check `policy` on `costs` with `p` workers against every interleaving
/// under both timing models.
pub fn exhaustive_small_check(costs: &[u64], p: usize, policy: &Policy) -> CheckReport {
    exhaustive_small_check_with(costs, p, policy, Mutation::None)
}

/// As [`exhaustive_small_check`], with a protocol bug injected.
pub fn exhaustive_small_check_with(
    costs: &[u64],
    p: usize,
    policy: &Policy,
    mutation: Mutation,
) -> CheckReport {
    let timed = check_with_timing(costs, p, policy, mutation, Timing::Virtual);
    if !timed.passed {
        return timed;
    }
    let free = check_with_timing(costs, p, policy, mutation, Timing::Free);
    CheckReport {
        states: timed.states + free.states,
        terminal_states: timed.terminal_states + free.terminal_states,
        ..free
    }
}

/// Search a single timing model.
pub fn check_with_timing(
    costs: &[u64],
    p: usize,
    policy: &Policy,
    mutation: Mutation,
    timing: Timing,
) -> CheckReport {
    let n = costs.len();
    let total: u64 = costs.iter().sum();
    if n > MAX_N || p == 0 || p > MAX_P || total > 1000 || policy.validated().is_err() {
        return CheckReport {
            passed: false,
            states: 0,
            terminal_states: 0,
            violation: Some(Violation {
                kind: ViolationKind::TooLarge,
                timing,
                trace: Vec::new(),
            }),
        };
    }
    let mut checker = Checker {
        costs,
        n,
        p,
        policy: *policy,
        mutation,
        timing,
        visited: HashSet::new(),
        path: Vec::new(),
        terminal_states: 0,
    };
    let init = checker.initial();
    checker.visited.insert(fingerprint(&init));
    let result = checker.explore(init);
    let violation = result
        .err()
        .map(|kind| Violation { kind, timing, trace: checker.render_path() });
    CheckReport {
        passed: violation.is_none(),
        states: checker.visited.len(),
        terminal_states: checker.terminal_states,
        violation,
    }
}

fn fingerprint(m: &Model) -> u64 {
    let mut h = DefaultHasher::new();
    m.hash(&mut h);
    h.finish()
}

/// Mark `[begin, end)` as handed to a running chunk.
fn claim(m: &mut Model, begin: u8, end: u8) -> Result<(), ViolationKind> {
    for i in begin..end {
        if m.claimed & (1 << i) != 0 {
            return Err(ViolationKind::Duplicate { iteration: i as usize });
        }
        m.claimed |= 1 << i;
    }
    Ok(())
}

struct Checker<'a> {
    costs: &'a [u64],
    n: usize,
    p: usize,
    policy: Policy,
    mutation: Mutation,
    timing: Timing,
    visited: HashSet<u64>,
    path: Vec<Move>,
    terminal_states: usize,
}

impl Checker<'_> {
    fn initial(&self) -> Model {
        let d = self.p.min(self.n.max(1)) as u8;
        let idle = Mw { begin: 0, end: 0, k: 0, d, locked: false, failed: 0, pc: Pc::Exited };
        let mut w = [idle; MAX_P];
        for (i, slot) in w.iter_mut().enumerate().take(self.p) {
            let r = if self.policy.uses_local_queues() {
                static_partition(self.n, self.p, i)
            } else {
                Default::default()
            };
            slot.begin = r.begin as u8;
            slot.end = r.end as u8;
            slot.pc = Pc::Start;
        }
        Model { now: 0, counter: 0, completed: 0, claimed: 0, done: 0, w }
    }

    fn explore(&mut self, m: Model) -> Result<(), ViolationKind> {
        if self.visited.len() > STATE_LIMIT {
            return Err(ViolationKind::StateLimit);
        }
        let moves = self.moves(&m);
        if moves.is_empty() {
            self.terminal_states += 1;
            return self.check_terminal(&m);
        }
        for mv in moves {
            let mut next = m;
            self.path.push(mv);
            self.apply(&mut next, mv)?;
            self.check_invariants(&next)?;
            if self.visited.insert(fingerprint(&next)) {
                self.explore(next)?;
            }
            self.path.pop();
        }
        Ok(())
    }

    fn enabled(&self, m: &Model, w: usize) -> bool {
        let me = &m.w[w];
        match me.pc {
            Pc::Exec { until, .. } => self.timing == Timing::Free || until == m.now,
            Pc::Lock { .. } | Pc::Install { .. } => !me.locked,
            Pc::StealLock { v } => !m.w[v as usize].locked,
            Pc::Parked | Pc::Exited => false,
            _ => true,
        }
    }

    fn moves(&self, m: &Model) -> Vec<Move> {
        let mut out = Vec::new();
        for w in 0..self.p {
            if !self.enabled(m, w) {
                continue;
            }
            let me = &m.w[w];
            if me.pc == Pc::StealSelect && (m.completed as usize) < self.n {
                let mut any = false;
                for v in (0..self.p).filter(|&v| v != w && me.failed & (1 << v) == 0) {
                    any = true;
                    out.push(Move::Step { w: w as u8, pc: me.pc, victim: Some(v as u8) });
                }
                if !any {
                    out.push(Move::Step { w: w as u8, pc: me.pc, victim: None });
                }
            } else {
                out.push(Move::Step { w: w as u8, pc: me.pc, victim: None });
            }
        }
        if out.is_empty() {
            let next = m.w[..self.p]
                .iter()
                .filter_map(|x| match x.pc {
                    Pc::Exec { until, .. } => Some(until),
                    _ => None,
                })
                .min();
            if let Some(t) = next {
                out.push(Move::Tick(t));
            }
        }
        out
    }

    fn cost(&self, begin: u8, end: u8) -> u16 {
        self.costs[begin as usize..end as usize].iter().sum::<u64>() as u16
    }

    fn wake_all(&self, m: &mut Model) {
        for x in m.w[..self.p].iter_mut() {
            x.failed = 0;
            if x.pc == Pc::Parked {
                x.pc = Pc::StealSelect;
            }
        }
    }

    fn exec(&self, m: &mut Model, w: usize, begin: u8, end: u8) -> Result<(), ViolationKind> {
        if end <= begin {
            return Err(ViolationKind::ChunkBound { worker: w, len: 0 });
        }
        claim(m, begin, end)?;
        let until = match self.timing {
            Timing::Virtual => m.now + self.cost(begin, end),
            Timing::Free => 0,
        };
        m.w[w].pc = Pc::Exec { begin, end, until };
        self.wake_all(m);
        Ok(())
    }

    fn after_local_empty(&self) -> Pc {
        if self.p == 1 {
            Pc::Exited
        } else {
            Pc::StealSelect
        }
    }

    fn apply(&self, m: &mut Model, mv: Move) -> Result<(), ViolationKind> {
        let (w, victim) = match mv {
            Move::Tick(t) => {
                m.now = t;
                return Ok(());
            }
            Move::Step { w, victim, .. } => (w as usize, victim),
        };
        let n = self.n as u8;
        match m.w[w].pc {
            Pc::Start => self.start(m, w)?,
            Pc::Advance { chunk } => {
                let b = m.w[w].begin;
                m.w[w].begin = b + chunk;
                m.w[w].pc = Pc::CheckEnd { b, chunk };
            }
            Pc::CheckEnd { b, chunk } => {
                if b + chunk < m.w[w].end {
                    self.exec(m, w, b, b + chunk)?;
                } else {
                    m.w[w].pc = Pc::Rollback { b, chunk };
                }
            }
            Pc::Rollback { b, chunk } => {
                if self.mutation != Mutation::OwnerSkipsRollback {
                    m.w[w].begin = b;
                }
                m.w[w].pc = Pc::Lock { chunk };
            }
            Pc::Lock { chunk } => {
                m.w[w].locked = true;
                m.w[w].pc = Pc::LockedClaim { chunk };
            }
            Pc::LockedClaim { chunk } => {
                let (b, e) = (m.w[w].begin, m.w[w].end);
                m.w[w].locked = false;
                if b < e {
                    let take = chunk.min(e - b);
                    m.w[w].begin = b + take;
                    self.exec(m, w, b, b + take)?;
                } else {
                    m.w[w].pc = self.after_local_empty();
                }
            }
            Pc::Exec { begin, end, .. } => {
                for i in begin..end {
                    if m.done & (1 << i) != 0 {
                        return Err(ViolationKind::Duplicate { iteration: i as usize });
                    }
                    m.done |= 1 << i;
                }
                m.completed += end - begin;
                m.w[w].k += end - begin;
                if let Policy::Ich { epsilon, polarity } = self.policy {
                    let ks: Vec<u64> = m.w[..self.p].iter().map(|x| x.k as u64).collect();
                    let class = classify_load(m.w[w].k as u64, &ks, epsilon);
                    m.w[w].d =
                        adapt_divisor(m.w[w].d as usize, class, polarity, self.n.max(1)) as u8;
                }
                m.w[w].pc = Pc::Start;
                self.wake_all(m);
            }
            Pc::StealSelect => {
                m.w[w].pc = if m.completed >= n {
                    Pc::Exited
                } else {
                    match victim {
                        Some(v) => Pc::StealPre { v },
                        None => Pc::Parked,
                    }
                };
            }
            Pc::StealPre { v } => {
                let q = &m.w[v as usize];
                m.w[w].pc = if q.end <= q.begin {
                    self.fail(m, w, v)
                } else {
                    Pc::StealLock { v }
                };
            }
            Pc::StealLock { v } => {
                m.w[v as usize].locked = true;
                m.w[w].pc = Pc::StealReadEnd { v };
            }
            Pc::StealReadEnd { v } => {
                let end = m.w[v as usize].end;
                m.w[w].pc = Pc::StealReadBegin { v, end };
            }
            Pc::StealReadBegin { v, end } => {
                let half = end.saturating_sub(m.w[v as usize].begin) / 2;
                if half == 0 {
                    m.w[v as usize].locked = false;
                    m.w[w].pc = self.fail(m, w, v);
                } else {
                    m.w[w].pc = Pc::StealLower { v, end, half };
                }
            }
            Pc::StealLower { v, end, half } => {
                m.w[v as usize].end = end - half;
                m.w[w].pc = Pc::StealCheck { v, end, half };
            }
            Pc::StealCheck { v, end, half } => {
                let lowered = end - half;
                let vi = v as usize;
                let crossed = lowered <= m.w[vi].begin;
                if crossed && self.mutation != Mutation::StealSkipsAbort {
                    if self.mutation != Mutation::StealSkipsRollback {
                        m.w[vi].end = end;
                    }
                    m.w[vi].locked = false;
                    m.w[w].pc = self.fail(m, w, v);
                } else {
                    if let Some(i) = (lowered..end).find(|&i| m.claimed & (1 << i) != 0) {
                        return Err(ViolationKind::Duplicate { iteration: i as usize });
                    }
                    m.w[vi].locked = false;
                    m.w[w].pc = Pc::Install { v, begin: lowered, end };
                    self.wake_all(m);
                }
            }
            Pc::Install { v, begin, end } => {
                let vi = v as usize;
                if matches!(self.policy, Policy::Ich { .. }) {
                    let d = averaged_divisor(m.w[w].d as usize, m.w[vi].d as usize);
                    let k = averaged_count(m.w[w].k as u64, m.w[vi].k as u64);
                    m.w[w].d = d as u8;
                    m.w[w].k = k as u8;
                }
                m.w[w].begin = begin;
                m.w[w].end = end;
                m.w[w].pc = Pc::Start;
                self.wake_all(m);
            }
            Pc::Parked | Pc::Exited => unreachable!("disabled worker stepped"),
        }
        Ok(())
    }

    fn fail(&self, m: &mut Model, w: usize, v: u8) -> Pc {
        m.w[w].failed |= 1 << v;
        Pc::StealSelect
    }

    fn start(&self, m: &mut Model, w: usize) -> Result<(), ViolationKind> {
        let n = self.n;
        match self.policy {
            Policy::Static => {
                let r = static_partition(n, self.p, w);
                if m.w[w].k == 0 && !r.is_empty() {
                    self.exec(m, w, r.begin as u8, r.end as u8)?;
                } else {
                    m.w[w].pc = Pc::Exited;
                }
            }
            Policy::Dynamic { chunk } => {
                let c = m.counter as usize;
                if c >= n {
                    m.w[w].pc = Pc::Exited;
                } else {
                    let e = (c + chunk).min(n);
                    m.counter = e as u8;
                    self.exec(m, w, c as u8, e as u8)?;
                }
            }
            Policy::Guided { min_chunk } => {
                let c = m.counter as usize;
                if c >= n {
                    m.w[w].pc = Pc::Exited;
                } else {
                    let rem = n - c;
                    let e = c + (rem / self.p).max(min_chunk).min(rem);
                    m.counter = e as u8;
                    self.exec(m, w, c as u8, e as u8)?;
                }
            }
            Policy::Stealing { chunk } => {
                m.w[w].pc = Pc::Advance { chunk: chunk.min(MAX_N + 1) as u8 };
            }
            Policy::Ich { .. } => {
                let me = &m.w[w];
                let rem = me.end.saturating_sub(me.begin) as usize;
                let chunk = next_chunk_size(rem, me.d as usize);
                if chunk > rem {
                    return Err(ViolationKind::ChunkBound { worker: w, len: chunk });
                }
                m.w[w].pc = Pc::Advance { chunk: chunk.max(1) as u8 };
            }
        }
        Ok(())
    }

    fn check_invariants(&self, m: &Model) -> Result<(), ViolationKind> {
        for (u, x) in m.w[..self.p].iter().enumerate() {
            if matches!(self.policy, Policy::Ich { .. }) && (x.d == 0 || x.d as usize > self.n.max(1)) {
                return Err(ViolationKind::DivisorOutOfRange { worker: u, d: x.d as usize });
            }
            let owner_mid = matches!(x.pc, Pc::CheckEnd { .. } | Pc::Rollback { .. });
            let thief_mid = m.w[..self.p]
                .iter()
                .any(|t| matches!(t.pc, Pc::StealCheck { v, .. } if v as usize == u));
            if !owner_mid && !thief_mid && x.begin > x.end {
                return Err(ViolationKind::QueueInverted {
                    worker: u,
                    begin: x.begin as usize,
                    end: x.end as usize,
                });
            }
        }
        Ok(())
    }

    fn check_terminal(&self, m: &Model) -> Result<(), ViolationKind> {
        if let Some(i) = (0..self.n).find(|&i| m.done & (1 << i) == 0) {
            return Err(ViolationKind::Missing { iteration: i });
        }
        if m.w[..self.p].iter().any(|x| x.pc != Pc::Exited) {
            return Err(ViolationKind::Stuck);
        }
        Ok(())
    }

    fn render_path(&self) -> Vec<String> {
        let mut now = 0;
        self.path
            .iter()
            .map(|mv| match *mv {
                Move::Tick(t) => {
                    now = t;
                    format!("t={t} clock advances")
                }
                Move::Step { w, pc, victim } => match victim {
                    Some(v) => format!("t={now} w{w} {pc:?} -> victim {v}"),
                    None => format!("t={now} w{w} {pc:?}"),
                },
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::Polarity;

    fn stealing(chunk: usize) -> Policy {
        Policy::Stealing { chunk }
    }

    #[test]
    fn six_iterations_two_workers_chunk_one() {
        let r = exhaustive_small_check(&[1; 6], 2, &stealing(1));
        assert!(r.passed, "{:?}", r.violation);
        assert!(r.terminal_states > 1);
    }

    #[test]
    fn empty_loop_passes_trivially() {
        for policy in [Policy::Static, stealing(1), Policy::Ich { epsilon: 0.25, polarity: Polarity::FastGrows }] {
            assert!(exhaustive_small_check(&[], 3, &policy).passed);
        }
    }

    #[test]
    fn baselines_pass() {
        for policy in [Policy::Static, Policy::Dynamic { chunk: 2 }, Policy::Guided { min_chunk: 1 }] {
            let r = exhaustive_small_check(&[1, 3, 1, 3, 1], 3, &policy);
            assert!(r.passed, "{policy}: {:?}", r.violation);
        }
    }

    #[test]
    fn ich_both_polarities_pass() {
        for polarity in [Polarity::FastGrows, Polarity::FastShrinks] {
            let policy = Policy::Ich { epsilon: 0.25, polarity };
            let r = exhaustive_small_check(&[3, 1, 1, 3, 1, 1, 3, 1], 2, &policy);
            assert!(r.passed, "{:?}", r.violation);
        }
    }

    #[test]
    fn keeping_a_crossed_split_duplicates_work() {
        let r = exhaustive_small_check_with(&[1; 8], 2, &stealing(1), Mutation::StealSkipsAbort);
        assert!(!r.passed);
        let v = r.violation.unwrap();
        assert!(matches!(v.kind, ViolationKind::Duplicate { .. }), "{v}");
        assert!(!v.trace.is_empty());
    }

    #[test]
    fn other_mutants_fail() {
        for mutation in [Mutation::StealSkipsRollback, Mutation::OwnerSkipsRollback] {
            let r = exhaustive_small_check_with(&[1; 6], 2, &stealing(2), mutation);
            assert!(!r.passed, "{mutation:?} went unnoticed");
        }
    }

    #[test]
    fn owner_does_not_abandon_a_transiently_empty_queue() {
        // an owner that trusted an unlocked empty read here stranded one
        // unstealable iteration behind a thief's crossed split
        let policy = Policy::Ich { epsilon: 0.25, polarity: Polarity::FastGrows };
        let r = check_with_timing(&[1; 6], 2, &policy, Mutation::None, Timing::Free);
        assert!(r.passed, "{}", r.violation.unwrap());
    }

    #[test]
    fn free_timing_explores_more_than_virtual() {
        let v = check_with_timing(&[1, 3, 1, 1, 3, 1], 2, &stealing(1), Mutation::None, Timing::Virtual);
        let f = check_with_timing(&[1, 3, 1, 1, 3, 1], 2, &stealing(1), Mutation::None, Timing::Free);
        assert!(v.passed && f.passed);
        assert!(f.states > v.states);
    }

    #[test]
    fn oversize_instances_are_refused() {
        let r = exhaustive_small_check(&[1; 40], 2, &stealing(1));
        assert_eq!(r.violation.unwrap().kind, ViolationKind::TooLarge);
    }
}

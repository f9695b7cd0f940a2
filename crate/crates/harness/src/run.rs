use crate::bench::{build_graph, build_workload, load_matrix, BenchKernel, BfsBench, SpmvBench, SynthBench};
use crate::config::{App, ExperimentConfig, InputSpec};
use crate::HarnessError;
use loomsched::sim::{simulate, write_trace};
use loomsched::workloads::cache::BinaryCache;
use loomsched::{LoopScheduler, Policy, PolicyKind};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

/// Runs shorter than this are flagged as below useful timer resolution.
pub const MIN_RELIABLE_TIME: Duration = Duration::from_millis(1);

/// Timings of one (app, input, policy, threads) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub app: App,
    pub input: String,
    pub policy: String,
    pub param: String,
    pub threads: usize,
    /// Wall-clock seconds per timed repetition.
    pub times: Vec<f64>,
    /// The cell's output matched the single-thread static reference.
    pub verified: bool,
}

impl BenchRecord {
    pub fn repetitions(&self) -> usize {
        self.times.len()
    }

    pub fn best_time(&self) -> f64 {
        self.times.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn kind(&self) -> Option<PolicyKind> {
        PolicyKind::from_str(&self.policy).ok()
    }

    pub fn parsed_policy(&self) -> Option<Policy> {
        Policy::parse(self.kind()?, &self.param).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellFlag {
    /// Output differed from the reference; the cell was not timed further.
    OutputMismatch,
    /// The best run was faster than [`MIN_RELIABLE_TIME`]; kept but suspect.
    TimerResolution,
    /// The kernel itself failed.
    KernelFailed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedCell {
    pub policy: String,
    pub param: String,
    pub threads: usize,
    pub flag: CellFlag,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutcome {
    pub records: Vec<BenchRecord>,
    pub flags: Vec<FlaggedCell>,
}

impl ExperimentOutcome {
    pub fn fully_successful(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Time `kernel` over every grid cell.
///
/// The output of a single-thread static run is the reference. Each cell
/// does one untimed warm-up run and then `reps` timed runs; every output is
/// compared with the reference, and a mismatch drops the cell. `sink` sees
/// each record as soon as its cell finishes.
#[allow(clippy::too_many_arguments)]
pub fn run_cells<K: BenchKernel>(
    kernel: &K,
    app: App,
    input: &str,
    grid: &[Policy],
    threads: &[usize],
    reps: usize,
    seed: u64,
    pin: bool,
    sink: &mut dyn FnMut(&BenchRecord) -> Result<(), HarnessError>,
) -> Result<ExperimentOutcome, HarnessError> {
    let reference = kernel.run(&LoopScheduler::new(Policy::Static, 1)?)?;
    let mut out = ExperimentOutcome::default();
    for policy in grid {
        for &p in threads {
            let sched = LoopScheduler::new(*policy, p)?.pin(pin).seed(seed);
            let flag = |flag| FlaggedCell {
                policy: policy.kind().name().to_string(),
                param: policy.param_string(),
                threads: p,
                flag,
            };
            match time_cell(kernel, &sched, &reference, reps) {
                Ok(times) => {
                    let record = BenchRecord {
                        app,
                        input: input.to_string(),
                        policy: policy.kind().name().to_string(),
                        param: policy.param_string(),
                        threads: p,
                        times,
                        verified: true,
                    };
                    if record.best_time() < MIN_RELIABLE_TIME.as_secs_f64() {
                        out.flags.push(flag(CellFlag::TimerResolution));
                    }
                    sink(&record)?;
                    out.records.push(record);
                }
                Err(f) => out.flags.push(flag(f)),
            }
        }
    }
    Ok(out)
}

fn time_cell<K: BenchKernel>(
    kernel: &K,
    sched: &LoopScheduler,
    reference: &K::Output,
    reps: usize,
) -> Result<Vec<f64>, CellFlag> {
    let check = |r: Result<K::Output, HarnessError>| match r {
        Ok(o) if o == *reference => Ok(()),
        Ok(_) => Err(CellFlag::OutputMismatch),
        Err(e) => Err(CellFlag::KernelFailed(e.to_string())),
    };
    check(kernel.run(sched))?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        let result = kernel.run(sched);
        let elapsed = start.elapsed().as_secs_f64().max(1e-9);
        check(result)?;
        times.push(elapsed);
    }
    Ok(times)
}

/// Build the configured input and run the whole grid.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    sink: &mut dyn FnMut(&BenchRecord) -> Result<(), HarnessError>,
) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    let cache = cfg.cache_dir.as_ref().map(BinaryCache::new).transpose()?;
    let input = cfg.input.descriptor(cfg.seed);
    match (&cfg.app, &cfg.input) {
        (App::Synth, _) => {
            let k = SynthBench { spec: build_workload(cfg, cache.as_ref())? };
            go(cfg, &k, &input, sink)
        }
        (App::Spmv, InputSpec::Matrix(path)) => {
            let k = SpmvBench::new(load_matrix(path)?);
            go(cfg, &k, &input, sink)
        }
        (App::Spmv, InputSpec::Graph(src)) => {
            let k = SpmvBench::from_graph(&build_graph(src, cfg.seed, cache.as_ref())?)?;
            go(cfg, &k, &input, sink)
        }
        (App::Bfs, InputSpec::Graph(src)) => {
            let graph = build_graph(src, cfg.seed, cache.as_ref())?;
            if graph.vertex_count() == 0 {
                return Err(HarnessError::Config("graph has no vertices".into()));
            }
            go(cfg, &BfsBench { graph, source: 0 }, &input, sink)
        }
        _ => unreachable!("rejected by validate"),
    }
}

fn go<K: BenchKernel>(
    cfg: &ExperimentConfig,
    kernel: &K,
    input: &str,
    sink: &mut dyn FnMut(&BenchRecord) -> Result<(), HarnessError>,
) -> Result<ExperimentOutcome, HarnessError> {
    if let Some(path) = &cfg.trace {
        write_traces(kernel, cfg, input, path)?;
    }
    run_cells(kernel, cfg.app, input, &cfg.grid, &cfg.threads, cfg.reps, cfg.seed, cfg.pin, sink)
}

/// Replay every cell in the simulator and write the event logs, each
/// preceded by a `#` header naming the cell.
fn write_traces<K: BenchKernel>(
    kernel: &K,
    cfg: &ExperimentConfig,
    input: &str,
    path: &std::path::Path,
) -> Result<(), HarnessError> {
    let costs = kernel.iteration_costs();
    let mut w = BufWriter::new(File::create(path)?);
    for policy in &cfg.grid {
        for &p in &cfg.threads {
            let outcome = simulate(&costs, p, policy, cfg.seed)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            writeln!(w, "# app={} input={input} policy={policy} threads={p} makespan={}", cfg.app, outcome.makespan)?;
            write_trace(&outcome.events, &mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_time_is_minimum() {
        let r = BenchRecord {
            app: App::Synth,
            input: "x".into(),
            policy: "ich".into(),
            param: "0.25".into(),
            threads: 4,
            times: vec![0.3, 0.1, 0.2, 0.5, 0.4],
            verified: true,
        };
        assert_eq!(r.best_time(), 0.1);
        assert_eq!(r.repetitions(), 5);
        assert_eq!(r.kind(), Some(PolicyKind::Ich));
        assert!(r.parsed_policy().is_some());
    }
}

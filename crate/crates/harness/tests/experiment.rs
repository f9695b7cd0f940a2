use loomsched::workloads::Distribution;
use loomsched::{LoopScheduler, Polarity, Policy};
use loomsched_bench::{
    run_cells, run_experiment, App, BenchKernel, CellFlag, ExperimentConfig, HarnessError,
    InputSpec,
};

fn exp_dec(n: usize) -> InputSpec {
    InputSpec::Synth { distribution: Distribution::ExpDecreasing, n, beta: 30.0, work_scale: 1.0 }
}

#[test]
fn grid_cardinality() {
    let mut cfg = ExperimentConfig::new(App::Synth, exp_dec(3000));
    cfg.grid = vec![Policy::Guided { min_chunk: 1 }, Policy::Ich { epsilon: 0.25, polarity: Polarity::FastGrows }];
    cfg.threads = vec![1, 4];
    cfg.reps = 5;
    cfg.pin = false;
    let mut seen = 0;
    let out = run_experiment(&cfg, &mut |_| {
        seen += 1;
        Ok(())
    })
    .unwrap();
    assert_eq!(out.records.len(), 4);
    assert_eq!(seen, 4);
    for r in &out.records {
        assert!(r.verified);
        assert_eq!(r.repetitions(), 5);
        assert!(r.times.iter().all(|&t| t > 0.0));
        assert_eq!(r.best_time(), r.times.iter().copied().fold(f64::INFINITY, f64::min));
    }
}

/// Returns a wrong answer whenever it runs on more than two threads.
struct FlakyKernel;

impl BenchKernel for FlakyKernel {
    type Output = usize;

    fn run(&self, sched: &LoopScheduler) -> Result<usize, HarnessError> {
        let stats = sched.run(100, |_| {});
        Ok(stats.iterations + usize::from(sched.threads() > 2))
    }

    fn iteration_costs(&self) -> Vec<u64> {
        vec![1; 100]
    }
}

#[test]
fn mismatched_cells_are_flagged_and_skipped() {
    let grid = [Policy::Static, Policy::Dynamic { chunk: 4 }];
    let out = run_cells(&FlakyKernel, App::Synth, "flaky", &grid, &[1, 2, 4], 2, 0, false, &mut |_| Ok(())).unwrap();
    assert_eq!(out.records.len(), 4);
    let mismatches: Vec<_> = out.flags.iter().filter(|f| f.flag == CellFlag::OutputMismatch).collect();
    assert_eq!(mismatches.len(), 2);
    assert!(mismatches.iter().all(|f| f.threads == 4));
    assert!(!out.fully_successful());
}

#[test]
fn missing_input_file_is_an_error() {
    let mut cfg = ExperimentConfig::new(App::Spmv, InputSpec::Matrix("/definitely/not/here.mtx".into()));
    cfg.threads = vec![1];
    assert!(matches!(run_experiment(&cfg, &mut |_| Ok(())), Err(HarnessError::InputNotFound(_))));
}

#[test]
fn cached_inputs_reproduce_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(
        App::Bfs,
        InputSpec::Graph(loomsched_bench::GraphSource::ScaleFree { nv: 3000, gamma: 2.3 }),
    );
    cfg.grid = vec![Policy::Stealing { chunk: 3 }];
    cfg.threads = vec![2];
    cfg.reps = 1;
    cfg.cache_dir = Some(dir.path().to_path_buf());
    let a = run_experiment(&cfg, &mut |_| Ok(())).unwrap();
    let b = run_experiment(&cfg, &mut |_| Ok(())).unwrap();
    assert_eq!(a.records.len(), 1);
    assert_eq!(b.records.len(), 1);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

use clap::{Parser, ValueEnum};
use loomsched::workloads::Distribution;
use loomsched::{Polarity, PolicyKind};
use loomsched_bench::config::available_threads;
use loomsched_bench::{
    build_grid, default_threads, emit_report, run_experiment, App, BenchRecord, ExperimentConfig,
    Format, GraphSource, HarnessError, InputSpec, Report,
};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphArg {
    Uniform,
    Scalefree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Time loop schedulers on synthetic, sparse-matrix and graph kernels.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[arg(long, default_value = "synth")]
    app: App,
    /// Run only this policy (all five when omitted).
    #[arg(long)]
    policy: Option<PolicyKind>,
    /// Chunk sizes for dynamic, guided and stealing (comma separated).
    #[arg(long, value_delimiter = ',')]
    chunk: Vec<usize>,
    /// iCh ε values (comma separated).
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// iCh adaptation direction: `paper` (Low doubles d) or `figure` (High doubles d).
    #[arg(long, default_value = "paper")]
    polarity: Polarity,
    /// Thread counts (comma separated); defaults to 1,2,4,… up to the core count.
    #[arg(long, value_delimiter = ',', env = "LOOMSCHED_THREADS")]
    threads: Vec<usize>,
    #[arg(long, default_value = "exp-dec")]
    dist: Distribution,
    /// Mean work units per synthetic iteration.
    #[arg(long, default_value_t = 1000.0)]
    beta: f64,
    /// Synthetic loop length.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Multiply every synthetic cost by this factor.
    #[arg(long, default_value_t = 1.0)]
    work_scale: f64,
    /// Matrix Market file (spmv matrix, or adjacency pattern for bfs).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "scalefree")]
    graph: GraphArg,
    #[arg(long, default_value_t = 2.3)]
    gamma: f64,
    /// Vertex count of generated graphs.
    #[arg(long, default_value_t = 100_000)]
    nv: usize,
    /// Largest degree of generated uniform graphs.
    #[arg(long, default_value_t = 10)]
    max_degree: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, value_enum, default_value = "on")]
    pin: Toggle,
    /// Report file; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; inferred from the `--out` extension, else csv.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Also write simulator event traces for every cell.
    #[arg(long)]
    trace: bool,
    /// Cache generated inputs in this directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl Cli {
    fn format(&self) -> Format {
        match self.format {
            Some(FormatArg::Csv) => Format::Csv,
            Some(FormatArg::Json) => Format::Json,
            None => self.out.as_deref().and_then(Format::from_path).unwrap_or(Format::Csv),
        }
    }

    fn input(&self) -> InputSpec {
        match (self.app, &self.input) {
            (App::Synth, _) => InputSpec::Synth {
                distribution: self.dist,
                n: self.n,
                beta: self.beta,
                work_scale: self.work_scale,
            },
            (App::Spmv, Some(path)) => InputSpec::Matrix(path.clone()),
            (App::Bfs, Some(path)) => InputSpec::Graph(GraphSource::File(path.clone())),
            (_, None) => InputSpec::Graph(match self.graph {
                GraphArg::Uniform => GraphSource::Uniform { nv: self.nv, max_degree: self.max_degree },
                GraphArg::Scalefree => GraphSource::ScaleFree { nv: self.nv, gamma: self.gamma },
            }),
        }
    }

    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let threads = if self.threads.is_empty() {
            default_threads(available_threads())
        } else {
            self.threads.clone()
        };
        let trace = self.trace.then(|| {
            self.out
                .as_ref()
                .map_or_else(|| PathBuf::from("bench.trace.tsv"), |p| p.with_extension("trace.tsv"))
        });
        Ok(ExperimentConfig {
            app: self.app,
            input: self.input(),
            grid: build_grid(self.policy, &self.chunk, &self.epsilon, self.polarity)?,
            threads,
            reps: self.reps,
            seed: self.seed,
            pin: self.pin == Toggle::On,
            cache_dir: self.cache.clone(),
            trace,
        })
    }
}

/// Appends run rows to `<out>.partial` as cells finish.
struct PartialLog {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl PartialLog {
    fn create(out: &Path) -> Result<Self, HarnessError> {
        let mut name = out.as_os_str().to_owned();
        name.push(".partial");
        let path = PathBuf::from(name);
        let writer = csv::Writer::from_path(&path)?;
        Ok(PartialLog { path, writer })
    }

    fn append(&mut self, record: &BenchRecord) -> Result<(), HarnessError> {
        for row in Report::from_records(std::slice::from_ref(record)).runs {
            self.writer.serialize(row)?;
        }
        self.writer.flush()?;
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<bool, HarnessError> {
    let cfg = cli.config()?;
    let mut partial = cli.out.as_deref().map(PartialLog::create).transpose()?;
    let mut sink = |r: &BenchRecord| -> Result<(), HarnessError> {
        eprintln!(
            "{} {} {}({}) p={} best={:.6}s",
            r.app,
            r.input,
            r.policy,
            r.param,
            r.threads,
            r.best_time()
        );
        if let Some(log) = partial.as_mut() {
            log.append(r)?;
        }
        Ok(())
    };
    let outcome = run_experiment(&cfg, &mut sink)?;
    for f in &outcome.flags {
        eprintln!("flagged: {}({}) p={}: {:?}", f.policy, f.param, f.threads, f.flag);
    }
    match &cli.out {
        Some(path) => {
            emit_report(&outcome.records, cli.format(), path)?;
            if let Some(log) = partial {
                drop(log.writer);
                fs::remove_file(log.path)?;
            }
        }
        None => {
            if outcome.records.is_empty() {
                return Err(HarnessError::EmptyReport);
            }
            let stdout = io::stdout();
            Report::from_records(&outcome.records).write(cli.format(), BufWriter::new(stdout.lock()))?;
        }
    }
    Ok(outcome.fully_successful())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let _ = writeln!(io::stderr(), "bench: {e}");
            ExitCode::FAILURE
        }
    }
}

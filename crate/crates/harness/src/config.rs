use crate::HarnessError;
use loomsched::workloads::Distribution;
use loomsched::{Polarity, Policy, PolicyKind};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum App {
    Synth,
    Spmv,
    Bfs,
}

impl App {
    pub fn name(self) -> &'static str {
        match self {
            App::Synth => "synth",
            App::Spmv => "spmv",
            App::Bfs => "bfs",
        }
    }
}

impl fmt::Display for App {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for App {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synth" => Ok(App::Synth),
            "spmv" => Ok(App::Spmv),
            "bfs" => Ok(App::Bfs),
            other => Err(HarnessError::Config(format!("unknown app `{other}`"))),
        }
    }
}

/// Where a graph input comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Uniform { nv: usize, max_degree: usize },
    ScaleFree { nv: usize, gamma: f64 },
    /// Square Matrix Market file read as an adjacency pattern.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Synth { distribution: Distribution, n: usize, beta: f64, work_scale: f64 },
    /// Matrix Market file for spmv.
    Matrix(PathBuf),
    /// A graph; spmv multiplies by its weighted adjacency matrix.
    Graph(GraphSource),
}

impl InputSpec {
    /// Short label used in reports.
    pub fn descriptor(&self, seed: u64) -> String {
        match self {
            InputSpec::Synth { distribution, n, beta, work_scale } => {
                let mut s = format!("{distribution}:n={n}:beta={beta}:seed={seed}");
                if *work_scale != 1.0 {
                    s.push_str(&format!(":scale={work_scale}"));
                }
                s
            }
            InputSpec::Matrix(p) => format!("file:{}", p.display()),
            InputSpec::Graph(GraphSource::Uniform { nv, max_degree }) => {
                format!("uniform:nv={nv}:max_degree={max_degree}:seed={seed}")
            }
            InputSpec::Graph(GraphSource::ScaleFree { nv, gamma }) => {
                format!("scalefree:nv={nv}:gamma={gamma}:seed={seed}")
            }
            InputSpec::Graph(GraphSource::File(p)) => format!("file:{}", p.display()),
        }
    }
}

/// One experiment: a kernel on one input, swept over a policy grid and a
/// thread set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub app: App,
    pub input: InputSpec,
    pub grid: Vec<Policy>,
    pub threads: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub pin: bool,
    /// Directory for generated inputs, reused across runs.
    pub cache_dir: Option<PathBuf>,
    /// Write simulator event traces for every cell to this file.
    pub trace: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(app: App, input: InputSpec) -> Self {
        ExperimentConfig {
            app,
            input,
            grid: default_grid(Polarity::default()),
            threads: default_threads(available_threads()),
            reps: 5,
            seed: 1,
            pin: true,
            cache_dir: None,
            trace: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.grid.is_empty() {
            return Err(HarnessError::Config("empty policy grid".into()));
        }
        if self.threads.is_empty() || self.threads.contains(&0) {
            return Err(HarnessError::Config("thread counts must be non-empty and >= 1".into()));
        }
        if self.reps == 0 {
            return Err(HarnessError::Config("at least one repetition is required".into()));
        }
        for p in &self.grid {
            p.validated()?;
        }
        let ok = matches!(
            (self.app, &self.input),
            (App::Synth, InputSpec::Synth { .. })
                | (App::Spmv, InputSpec::Matrix(_) | InputSpec::Graph(_))
                | (App::Bfs, InputSpec::Graph(_))
        );
        if !ok {
            return Err(HarnessError::Config(format!("{} cannot run on this input", self.app)));
        }
        if let InputSpec::Synth { work_scale, .. } = self.input {
            if !(work_scale.is_finite() && work_scale > 0.0) {
                return Err(HarnessError::Config("work scale must be positive".into()));
            }
        }
        Ok(())
    }
}

/// The reference parameter grid: static; dynamic and guided with chunks
/// {1,2,3}; stealing with chunks {1,2,3,64}; iCh with ε ∈ {0.25,0.33,0.5}.
pub fn default_grid(polarity: Polarity) -> Vec<Policy> {
    let mut grid = vec![Policy::Static];
    grid.extend([1, 2, 3].map(|chunk| Policy::Dynamic { chunk }));
    grid.extend([1, 2, 3].map(|min_chunk| Policy::Guided { min_chunk }));
    grid.extend([1, 2, 3, 64].map(|chunk| Policy::Stealing { chunk }));
    grid.extend([0.25, 0.33, 0.5].map(|epsilon| Policy::Ich { epsilon, polarity }));
    grid
}

/// Grid for a command line selection: one policy kind (or all of them when
/// `kind` is `None`). Non-empty `chunks` / `epsilons` replace the default
/// chunk sets and ε set.
pub fn build_grid(
    kind: Option<PolicyKind>,
    chunks: &[usize],
    epsilons: &[f64],
    polarity: Polarity,
) -> Result<Vec<Policy>, HarnessError> {
    let pick = |given: &[usize], default: &[usize]| -> Vec<usize> {
        if given.is_empty() { default.to_vec() } else { given.to_vec() }
    };
    let kinds = kind.map_or_else(|| PolicyKind::ALL.to_vec(), |k| vec![k]);
    let mut grid = Vec::new();
    for k in kinds {
        match k {
            PolicyKind::Static => grid.push(Policy::Static),
            PolicyKind::Dynamic => {
                for c in pick(chunks, &[1, 2, 3]) {
                    grid.push(Policy::dynamic(c)?);
                }
            }
            PolicyKind::Guided => {
                for c in pick(chunks, &[1, 2, 3]) {
                    grid.push(Policy::guided(c)?);
                }
            }
            PolicyKind::Stealing => {
                for c in pick(chunks, &[1, 2, 3, 64]) {
                    grid.push(Policy::stealing(c)?);
                }
            }
            PolicyKind::Ich => {
                let eps = if epsilons.is_empty() { vec![0.25, 0.33, 0.5] } else { epsilons.to_vec() };
                for e in eps {
                    grid.push(Policy::ich(e, polarity)?);
                }
            }
        }
    }
    Ok(grid)
}

/// Powers of two below `hw`, then `hw` itself.
pub fn default_threads(hw: usize) -> Vec<usize> {
    let hw = hw.max(1);
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |&p| Some(p * 2))
        .take_while(|&p| p < hw)
        .collect();
    out.push(hw);
    out
}

pub fn available_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

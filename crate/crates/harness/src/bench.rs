//! Kernels as the harness sees them: prepared inputs that can be run under
//! any scheduler and produce a comparable output.

use crate::config::{ExperimentConfig, GraphSource, InputSpec};
use crate::HarnessError;
use loomsched::kernels::{bfs, spmv, synth_kernel};
use loomsched::workloads::cache::{graph_key, workload_key, BinaryCache};
use loomsched::workloads::{
    gen_scale_free_graph, gen_uniform_graph, read_matrix_market, CsrMatrix, Graph, GraphKind,
    WorkloadSpec,
};
use loomsched::LoopScheduler;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub trait BenchKernel {
    type Output: PartialEq;

    fn run(&self, sched: &LoopScheduler) -> Result<Self::Output, HarnessError>;

    /// Relative cost of each loop iteration, for simulator traces.
    fn iteration_costs(&self) -> Vec<u64>;
}

pub struct SynthBench {
    pub spec: WorkloadSpec,
}

impl BenchKernel for SynthBench {
    type Output = u64;

    fn run(&self, sched: &LoopScheduler) -> Result<u64, HarnessError> {
        Ok(synth_kernel(&self.spec, sched))
    }

    fn iteration_costs(&self) -> Vec<u64> {
        self.spec.costs.clone()
    }
}

pub struct SpmvBench {
    pub matrix: CsrMatrix,
    pub x: Vec<f64>,
}

impl SpmvBench {
    /// Multiply by a fixed, non-trivial input vector.
    pub fn new(matrix: CsrMatrix) -> Self {
        let x = (0..matrix.cols()).map(|j| (j % 17) as f64 * 0.5 - 4.0).collect();
        SpmvBench { matrix, x }
    }

    /// The adjacency matrix of `g` with deterministic weights.
    pub fn from_graph(g: &Graph) -> Result<Self, HarnessError> {
        let nv = g.vertex_count();
        let cols: Vec<usize> = g.targets().iter().map(|&t| t as usize).collect();
        let values = (0..cols.len()).map(|k| 1.0 + (k % 7) as f64 * 0.25).collect();
        let m = CsrMatrix::from_parts(nv, nv, g.offsets().to_vec(), cols, values)?;
        Ok(SpmvBench::new(m))
    }
}

impl BenchKernel for SpmvBench {
    type Output = Vec<f64>;

    fn run(&self, sched: &LoopScheduler) -> Result<Vec<f64>, HarnessError> {
        Ok(spmv(&self.matrix, &self.x, sched)?)
    }

    fn iteration_costs(&self) -> Vec<u64> {
        (0..self.matrix.rows()).map(|r| self.matrix.row_nnz(r) as u64 + 1).collect()
    }
}

pub struct BfsBench {
    pub graph: Graph,
    pub source: usize,
}

impl BenchKernel for BfsBench {
    type Output = Vec<u32>;

    fn run(&self, sched: &LoopScheduler) -> Result<Vec<u32>, HarnessError> {
        Ok(bfs(&self.graph, self.source, sched)?.levels)
    }

    fn iteration_costs(&self) -> Vec<u64> {
        self.graph.degrees().into_iter().map(|d| d as u64 + 1).collect()
    }
}

fn open(path: &Path) -> Result<BufReader<File>, HarnessError> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(HarnessError::InputNotFound(path.to_path_buf()))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn load_matrix(path: &Path) -> Result<CsrMatrix, HarnessError> {
    Ok(read_matrix_market(open(path)?)?)
}

/// Read a square Matrix Market file as a directed adjacency pattern.
pub fn load_graph_file(path: &Path) -> Result<Graph, HarnessError> {
    let m = load_matrix(path)?;
    if m.rows() != m.cols() {
        return Err(HarnessError::Config(format!(
            "graph matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let targets = m.col_indices().iter().map(|&c| c as u32).collect();
    Ok(Graph::from_csr(m.row_offsets().to_vec(), targets)?)
}

pub fn build_graph(src: &GraphSource, seed: u64, cache: Option<&BinaryCache>) -> Result<Graph, HarnessError> {
    let (kind, nv) = match *src {
        GraphSource::File(ref p) => return load_graph_file(p),
        GraphSource::Uniform { nv, max_degree } => (GraphKind::Uniform { max_degree }, nv),
        GraphSource::ScaleFree { nv, gamma } => (GraphKind::ScaleFree { gamma }, nv),
    };
    let generate = || match kind {
        GraphKind::Uniform { max_degree } => gen_uniform_graph(nv, max_degree, seed),
        GraphKind::ScaleFree { gamma } => gen_scale_free_graph(nv, gamma, seed),
        GraphKind::Explicit => unreachable!(),
    };
    Ok(match cache {
        Some(c) => c.graph(&graph_key(kind, nv, seed), generate)?,
        None => generate()?,
    })
}

pub fn build_workload(cfg: &ExperimentConfig, cache: Option<&BinaryCache>) -> Result<WorkloadSpec, HarnessError> {
    let InputSpec::Synth { distribution, n, beta, work_scale } = cfg.input else {
        return Err(HarnessError::Config("not a synthetic input".into()));
    };
    let generate = || WorkloadSpec::generate(distribution, n, beta, cfg.seed);
    let spec = match cache {
        Some(c) => c.workload(&workload_key(distribution, n, beta, cfg.seed), generate)?,
        None => generate()?,
    };
    Ok(if work_scale == 1.0 { spec } else { spec.scaled(work_scale) })
}

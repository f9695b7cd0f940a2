use super::WorkloadError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How a graph was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    Uniform { max_degree: usize },
    ScaleFree { gamma: f64 },
    Explicit,
}

/// Directed graph in CSR form: the out-neighbours of `v` are
/// `targets[offsets[v]..offsets[v + 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    pub kind: GraphKind,
    pub seed: u64,
}

impl Graph {
    pub fn from_csr(offsets: Vec<usize>, targets: Vec<u32>) -> Result<Self, WorkloadError> {
        let g = Graph { offsets, targets, kind: GraphKind::Explicit, seed: 0 };
        g.validate()?;
        Ok(g)
    }

    pub fn from_adjacency(lists: &[Vec<u32>]) -> Result<Self, WorkloadError> {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for l in lists {
            targets.extend_from_slice(l);
            offsets.push(targets.len());
        }
        Graph::from_csr(offsets, targets)
    }

    /// Build the graph with an undirected edge list (both directions stored).
    pub fn from_undirected_edges(vertex_count: usize, edges: &[(u32, u32)]) -> Result<Self, WorkloadError> {
        let mut lists = vec![Vec::new(); vertex_count];
        for &(a, b) in edges {
            let (ai, bi) = (a as usize, b as usize);
            if ai >= vertex_count || bi >= vertex_count {
                return Err(WorkloadError::Invalid(format!("edge ({a},{b}) out of range")));
            }
            lists[ai].push(b);
            if a != b {
                lists[bi].push(a);
            }
        }
        Graph::from_adjacency(&lists)
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |m: String| Err(WorkloadError::Invalid(m));
        if self.offsets.is_empty() || self.offsets[0] != 0 {
            return bad("offsets must start at 0".into());
        }
        if self.offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("offsets must be non-decreasing".into());
        }
        if *self.offsets.last().unwrap() != self.targets.len() {
            return bad(format!(
                "last offset {} != edge count {}",
                self.offsets.last().unwrap(),
                self.targets.len()
            ));
        }
        let nv = self.vertex_count();
        if let Some(t) = self.targets.iter().find(|&&t| t as usize >= nv) {
            return bad(format!("target {t} outside [0, {nv})"));
        }
        Ok(())
    }

    fn from_degrees(degrees: impl Iterator<Item = usize>, nv: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<u32>) {
        let mut offsets = Vec::with_capacity(nv + 1);
        offsets.push(0);
        let mut total = 0;
        for d in degrees {
            total += d;
            offsets.push(total);
        }
        let targets = (0..total).map(|_| rng.gen_range(0..nv as u32)).collect();
        (offsets, targets)
    }
}

/// Each vertex gets an out-degree drawn uniformly from `[1, max_degree]`
/// and that many targets drawn uniformly from all vertices.
pub fn gen_uniform_graph(nv: usize, max_degree: usize, seed: u64) -> Result<Graph, WorkloadError> {
    if nv == 0 || max_degree == 0 {
        return Err(WorkloadError::InvalidParameter(
            "uniform graph needs nv >= 1 and max_degree >= 1".into(),
        ));
    }
    ensure_indexable(nv)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees: Vec<usize> = (0..nv).map(|_| rng.gen_range(1..=max_degree)).collect();
    let (offsets, targets) = Graph::from_degrees(degrees.into_iter(), nv, &mut rng);
    Ok(Graph { offsets, targets, kind: GraphKind::Uniform { max_degree }, seed })
}

/// Degree-sequence scale-free graph: out-degrees follow `P(k) ∝ k^-γ` on
/// `k ∈ [1, nv - 1]` (sampled by inverse CDF), endpoints are uniform.
pub fn gen_scale_free_graph(nv: usize, gamma: f64, seed: u64) -> Result<Graph, WorkloadError> {
    if nv < 2 || !(gamma > 1.0 && gamma.is_finite()) {
        return Err(WorkloadError::InvalidParameter(
            "scale-free graph needs nv >= 2 and gamma > 1".into(),
        ));
    }
    ensure_indexable(nv)?;
    let max_k = nv - 1;
    let mut cdf = Vec::with_capacity(max_k);
    let mut acc = 0.0f64;
    for k in 1..=max_k {
        acc += (k as f64).powf(-gamma);
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees: Vec<usize> = (0..nv)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            (cdf.partition_point(|&c| c <= u) + 1).min(max_k)
        })
        .collect();
    let (offsets, targets) = Graph::from_degrees(degrees.into_iter(), nv, &mut rng);
    Ok(Graph { offsets, targets, kind: GraphKind::ScaleFree { gamma }, seed })
}

fn ensure_indexable(nv: usize) -> Result<(), WorkloadError> {
    if nv > u32::MAX as usize {
        return Err(WorkloadError::InvalidParameter(format!("{nv} vertices exceed u32 indexing")));
    }
    Ok(())
}

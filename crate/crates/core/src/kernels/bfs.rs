use super::KernelError;
use crate::scheduler::LoopScheduler;
use crate::workloads::Graph;
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering::Relaxed};

/// Level of a vertex the search never reached.
pub const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsResult {
    pub levels: Vec<u32>,
    pub visited_count: usize,
    /// Number of non-empty frontiers (the source level included).
    pub level_count: usize,
    /// Loop iterations dispatched: one per vertex per level.
    pub iterations_total: usize,
    /// Iterations that found their vertex in the frontier.
    pub iterations_frontier: usize,
}

/// Level-synchronous breadth-first search.
///
/// Every level runs one `parallel_for` over all vertices; an iteration does
/// work only when its vertex is in the current frontier mask. Newly seen
/// neighbours are claimed with a test-and-set on their visited flag and
/// marked in the next frontier.
pub fn bfs(g: &Graph, source: usize, sched: &LoopScheduler) -> Result<BfsResult, KernelError> {
    let nv = g.vertex_count();
    if source >= nv {
        return Err(KernelError::SourceOutOfRange { vertex: source, vertex_count: nv });
    }
    let levels: Vec<AtomicU32> = (0..nv).map(|_| AtomicU32::new(UNREACHED)).collect();
    let visited: Vec<AtomicBool> = (0..nv).map(|_| AtomicBool::new(false)).collect();
    let mut frontier: Vec<AtomicBool> = (0..nv).map(|_| AtomicBool::new(false)).collect();
    let mut next: Vec<AtomicBool> = (0..nv).map(|_| AtomicBool::new(false)).collect();
    levels[source].store(0, Relaxed);
    visited[source].store(true, Relaxed);
    frontier[source].store(true, Relaxed);

    let mut level = 0u32;
    let mut level_count = 0;
    loop {
        let discovered = AtomicBool::new(false);
        {
            let (frontier, next) = (&frontier, &next);
            sched.run(nv, |v| {
                if !frontier[v].load(Relaxed) {
                    return;
                }
                frontier[v].store(false, Relaxed);
                for &u in g.neighbors(v) {
                    let u = u as usize;
                    if !visited[u].load(Relaxed) && !visited[u].swap(true, Relaxed) {
                        levels[u].store(level + 1, Relaxed);
                        next[u].store(true, Relaxed);
                        discovered.store(true, Relaxed);
                    }
                }
            });
        }
        level_count += 1;
        if !discovered.into_inner() {
            break;
        }
        std::mem::swap(&mut frontier, &mut next);
        level += 1;
    }

    let levels: Vec<u32> = levels.into_iter().map(AtomicU32::into_inner).collect();
    let visited_count = levels.iter().filter(|&&l| l != UNREACHED).count();
    Ok(BfsResult {
        levels,
        visited_count,
        level_count,
        iterations_total: nv * level_count,
        iterations_frontier: visited_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::{Polarity, Policy};

    fn ich() -> LoopScheduler {
        LoopScheduler::new(Policy::ich(0.33, Polarity::FastGrows).unwrap(), 4).unwrap()
    }

    #[test]
    fn path_graph_levels() {
        let g = Graph::from_undirected_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = bfs(&g, 0, &ich()).unwrap();
        assert_eq!(r.levels, vec![0, 1, 2, 3]);
        assert_eq!(r.visited_count, 4);
        assert_eq!(r.level_count, 4);
        assert_eq!(r.iterations_total, 16);
        assert_eq!(r.iterations_frontier, 4);
    }

    #[test]
    fn star_from_center() {
        let edges: Vec<(u32, u32)> = (1..20).map(|l| (0, l)).collect();
        let g = Graph::from_undirected_edges(20, &edges).unwrap();
        let r = bfs(&g, 0, &ich()).unwrap();
        assert_eq!(r.levels[0], 0);
        assert!(r.levels[1..].iter().all(|&l| l == 1));
    }

    #[test]
    fn unreachable_vertices_keep_sentinel() {
        let g = Graph::from_undirected_edges(5, &[(0, 1), (3, 4)]).unwrap();
        let r = bfs(&g, 0, &ich()).unwrap();
        assert_eq!(r.levels, vec![0, 1, UNREACHED, UNREACHED, UNREACHED]);
        assert_eq!(r.visited_count, 2);
    }

    #[test]
    fn bad_source() {
        let g = Graph::from_undirected_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(
            bfs(&g, 2, &ich()).unwrap_err(),
            KernelError::SourceOutOfRange { vertex: 2, vertex_count: 2 }
        );
    }
}

use std::collections::BTreeSet;

use crate::graph::{EdgeKey, NodeId, SocialGraph, Solution};
use crate::scalar::Scalar;

/// Coin-flip outcome for every edge of a live-edge graph.
pub trait Liveness<F> {
    fn is_live(&self, key: EdgeKey, p: F) -> bool;
}

/// Reusable traversal buffers.
#[derive(Debug, Clone, Default)]
pub(crate) struct Reacher {
    visited: Vec<bool>,
    stack: Vec<NodeId>,
    touched: Vec<NodeId>,
}

impl Reacher {
    pub(crate) fn new(n: usize) -> Self {
        Reacher {
            visited: vec![false; n],
            stack: Vec::new(),
            touched: Vec::new(),
        }
    }

    fn visit(&mut self, v: NodeId) {
        if !self.visited[v.index()] {
            self.visited[v.index()] = true;
            self.touched.push(v);
            self.stack.push(v);
        }
    }

    /// Marks `R(A, X)` and leaves it in `touched`.
    fn run<F: Scalar, L: Liveness<F> + ?Sized>(
        &mut self,
        graph: &SocialGraph<F>,
        sol: &Solution,
        live: &L,
    ) {
        if self.visited.len() < graph.node_count() {
            self.visited.resize(graph.node_count(), false);
        }
        for &a in sol.seeds() {
            self.visit(a);
        }
        // Bought edges always leave a seed, and seeds are reached unconditionally.
        for &e in sol.edges() {
            let c = graph.candidate(e);
            if live.is_live(graph.candidate_key(e), c.p) {
                self.visit(c.target);
            }
        }
        while let Some(u) = self.stack.pop() {
            for arc in graph.out_arcs(u) {
                if !self.visited[arc.target.index()] && live.is_live(arc.key, arc.p) {
                    self.visit(arc.target);
                }
            }
        }
    }

    fn reset(&mut self) {
        for v in self.touched.drain(..) {
            self.visited[v.index()] = false;
        }
    }

    pub(crate) fn count<F: Scalar, L: Liveness<F> + ?Sized>(
        &mut self,
        graph: &SocialGraph<F>,
        sol: &Solution,
        live: &L,
    ) -> usize {
        self.run(graph, sol, live);
        let n = self.touched.len();
        self.reset();
        n
    }
}

/// Nodes reachable from the seeds of `sol` over live edges of `E ∪ S`.
pub fn reachable<F: Scalar, L: Liveness<F> + ?Sized>(
    graph: &SocialGraph<F>,
    live: &L,
    sol: &Solution,
) -> BTreeSet<NodeId> {
    let mut reacher = Reacher::new(graph.node_count());
    reacher.run(graph, sol, live);
    let out = reacher.touched.iter().copied().collect();
    reacher.reset();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    struct Fixed(Vec<bool>);

    impl Liveness<f64> for Fixed {
        fn is_live(&self, key: EdgeKey, _p: f64) -> bool {
            self.0[key.0 as usize]
        }
    }

    fn path() -> SocialGraph<f64> {
        let mut b = GraphBuilder::with_nodes(3);
        b.edge(NodeId(0), NodeId(1), 0.5).unwrap();
        b.edge(NodeId(1), NodeId(2), 0.5).unwrap();
        b.candidate(NodeId(0), NodeId(2), 0.5, "0.1".parse().unwrap()).unwrap();
        b.build()
    }

    #[test]
    fn full_path_reaches_everything() {
        let g = path();
        let sol = Solution::new(&g, [NodeId(0)], []).unwrap();
        let r = reachable(&g, &Fixed(vec![true; 3]), &sol);
        assert_eq!(r, [NodeId(0), NodeId(1), NodeId(2)].into_iter().collect());
    }

    #[test]
    fn dead_first_edge_blocks() {
        let g = path();
        let sol = Solution::new(&g, [NodeId(0)], []).unwrap();
        let r = reachable(&g, &Fixed(vec![false, true, true]), &sol);
        assert_eq!(r, [NodeId(0)].into_iter().collect());
    }

    #[test]
    fn no_seeds_reach_nothing() {
        let g = path();
        assert!(reachable(&g, &Fixed(vec![true; 3]), &Solution::empty()).is_empty());
    }

    #[test]
    fn bought_edge_bypasses_dead_edge() {
        let g = path();
        let sol = Solution::new(&g, [NodeId(0)], [crate::graph::CandidateId(0)]).unwrap();
        let r = reachable(&g, &Fixed(vec![false, true, true]), &sol);
        assert_eq!(r, [NodeId(0), NodeId(2)].into_iter().collect());
        let mut reacher = Reacher::new(3);
        assert_eq!(reacher.count(&g, &sol, &Fixed(vec![false, true, true])), 2);
        // buffers are reset between calls
        assert_eq!(reacher.count(&g, &sol, &Fixed(vec![true, true, true])), 3);
    }
}

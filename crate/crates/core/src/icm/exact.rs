use crate::graph::{EdgeKey, NodeId, SocialGraph, Solution};
use crate::scalar::Scalar;

use super::reach::{Liveness, Reacher};
use super::{SpreadError, SpreadEstimate};

/// Default cap on the number of edges whose coin flips are enumerated.
pub const DEFAULT_EXACT_LIMIT: usize = 20;

/// Edges with `0 < p < 1` whose source is reachable from the seeds when every
/// edge with `p > 0` is present. Only these can change `R(A, X)`.
pub fn branching_edge_count<F: Scalar>(graph: &SocialGraph<F>, sol: &Solution) -> usize {
    let mut seen = vec![false; graph.node_count()];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut branching = 0;
    let push = |v: NodeId, seen: &mut Vec<bool>, stack: &mut Vec<NodeId>| {
        if !seen[v.index()] {
            seen[v.index()] = true;
            stack.push(v);
        }
    };
    for &a in sol.seeds() {
        push(a, &mut seen, &mut stack);
    }
    for &e in sol.edges() {
        let c = graph.candidate(e);
        if c.p > F::zero() {
            if c.p < F::one() {
                branching += 1;
            }
            push(c.target, &mut seen, &mut stack);
        }
    }
    while let Some(u) = stack.pop() {
        for arc in graph.out_arcs(u) {
            if arc.p > F::zero() {
                if arc.p < F::one() {
                    branching += 1;
                }
                push(arc.target, &mut seen, &mut stack);
            }
        }
    }
    branching
}

/// Exact `σ(A, S)`.
///
/// Walks the cascade from the seeds and branches on an edge's coin only when the
/// edge is examined and its head is still inactive; edges that cannot change the
/// reached set are marginalised away. Equivalent to summing `P[X]·|R(A, X)|` over
/// all live-edge graphs.
pub fn sigma_exact<F: Scalar>(
    graph: &SocialGraph<F>,
    sol: &Solution,
    limit: usize,
) -> Result<SpreadEstimate<F>, SpreadError> {
    if sol.seeds().is_empty() {
        return Ok(SpreadEstimate::exact(F::zero()));
    }
    let branching = branching_edge_count(graph, sol);
    if branching > limit {
        return Err(SpreadError::TooManyEdges {
            count: branching,
            limit,
        });
    }
    let mut walk = Cascade {
        graph,
        reached: vec![false; graph.node_count()],
        count: 0,
        pending: Vec::new(),
        total: F::zero(),
    };
    for &a in sol.seeds() {
        walk.activate(a);
    }
    for &e in sol.edges() {
        let c = graph.candidate(e);
        walk.pending.push((c.target, c.p));
    }
    walk.explore(0, F::one());
    Ok(SpreadEstimate::exact(walk.total))
}

struct Cascade<'g, F> {
    graph: &'g SocialGraph<F>,
    reached: Vec<bool>,
    count: usize,
    /// Edges leaving reached nodes, as `(head, p)`, in discovery order.
    pending: Vec<(NodeId, F)>,
    total: F,
}

impl<F: Scalar> Cascade<'_, F> {
    fn activate(&mut self, v: NodeId) {
        if !self.reached[v.index()] {
            self.reached[v.index()] = true;
            self.count += 1;
            let graph = self.graph;
            self.pending
                .extend(graph.out_arcs(v).iter().map(|arc| (arc.target, arc.p)));
        }
    }

    fn explore(&mut self, next: usize, prob: F) {
        let mut i = next;
        // Skip edges whose outcome cannot matter or is certain to be dead.
        while i < self.pending.len() {
            let (v, p) = self.pending[i];
            if !self.reached[v.index()] && p > F::zero() {
                break;
            }
            i += 1;
        }
        if i == self.pending.len() {
            self.total = self.total + prob * F::of_usize(self.count);
            return;
        }
        let (v, p) = self.pending[i];
        if p < F::one() {
            self.explore(i + 1, prob * (F::one() - p));
        }
        let mark = self.pending.len();
        self.activate(v);
        self.explore(i + 1, prob * p);
        self.pending.truncate(mark);
        self.reached[v.index()] = false;
        self.count -= 1;
    }
}

/// Assignment of coin flips to the uncertain edges of `E ∪ S` by bit mask.
struct MaskLiveness {
    bit: Vec<Option<u32>>,
    mask: u64,
}

impl<F: Scalar> Liveness<F> for MaskLiveness {
    fn is_live(&self, key: EdgeKey, p: F) -> bool {
        match self.bit[key.0 as usize] {
            Some(b) => self.mask >> b & 1 == 1,
            None => p >= F::one(),
        }
    }
}

/// `δ(A1, S1, A2, S2) = Σ_{X ∈ χ(S1)} P[X]·(|R(A1, X)| − |R(A2, X^T)|)`, `T = S1 \ S2`,
/// evaluated by plain enumeration of every live-edge graph of `G(S1)`.
///
/// This is the defining sum, independent of [`sigma_exact`]'s cascade walk.
pub fn delta_by_live_edge_sum<F: Scalar>(
    graph: &SocialGraph<F>,
    larger: &Solution,
    smaller: &Solution,
    limit: usize,
) -> Result<F, SpreadError> {
    if !larger.contains(smaller) {
        return Err(SpreadError::NotNested);
    }
    let mut bit = vec![None; graph.key_count()];
    let mut uncertain: Vec<F> = Vec::new();
    let keys = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (EdgeKey(i as u32), e.p))
        .chain(
            larger
                .edges()
                .iter()
                .map(|&c| (graph.candidate_key(c), graph.candidate(c).p)),
        );
    for (key, p) in keys {
        if p > F::zero() && p < F::one() {
            bit[key.0 as usize] = Some(uncertain.len() as u32);
            uncertain.push(p);
        }
    }
    if uncertain.len() > limit.min(62) {
        return Err(SpreadError::TooManyEdges {
            count: uncertain.len(),
            limit,
        });
    }
    let mut reacher = Reacher::new(graph.node_count());
    let mut live = MaskLiveness { bit, mask: 0 };
    let mut total = F::zero();
    for mask in 0..1u64 << uncertain.len() {
        let prob = uncertain
            .iter()
            .enumerate()
            .fold(F::one(), |acc, (b, &p)| {
                acc * if mask >> b & 1 == 1 { p } else { F::one() - p }
            });
        live.mask = mask;
        // X^T: the coins of T = S1 \ S2 are simply not consulted for the smaller solution.
        let big = reacher.count(graph, larger, &live);
        let small = reacher.count(graph, smaller, &live);
        total = total + prob * (F::of_usize(big) - F::of_usize(small));
    }
    Ok(total)
}

/// `σ(A, S)` by the defining live-edge sum (δ against the empty solution).
pub fn sigma_by_live_edge_sum<F: Scalar>(
    graph: &SocialGraph<F>,
    sol: &Solution,
    limit: usize,
) -> Result<F, SpreadError> {
    delta_by_live_edge_sum(graph, sol, &Solution::empty(), limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use approx::assert_relative_eq;

    fn chain(p1: f64, p2: f64) -> SocialGraph<f64> {
        let mut b = GraphBuilder::with_nodes(3);
        b.edge(NodeId(0), NodeId(1), p1).unwrap();
        b.edge(NodeId(1), NodeId(2), p2).unwrap();
        b.build()
    }

    fn seeds(g: &SocialGraph<f64>, ids: &[u32]) -> Solution {
        Solution::new(g, ids.iter().map(|&i| NodeId(i)), []).unwrap()
    }

    #[test]
    fn single_edge() {
        // (1*2 + 1*1) / 2
        let mut b = GraphBuilder::with_nodes(2);
        b.edge(NodeId(0), NodeId(1), 0.5).unwrap();
        let g = b.build();
        let est = sigma_exact(&g, &seeds(&g, &[0]), 20).unwrap();
        assert_eq!(est.value, 1.5);
        assert_eq!(est.replications, 0);
        assert_eq!(est.half_width, 0.0);
    }

    #[test]
    fn chain_of_halves() {
        // live-edge graphs: {} -> 1, {e1} -> 2, {e2} -> 1, {e1,e2} -> 3; mean 7/4
        let g = chain(0.5, 0.5);
        assert_eq!(sigma_exact(&g, &seeds(&g, &[0]), 20).unwrap().value, 1.75);
        assert_eq!(sigma_exact(&g, &seeds(&g, &[0, 1]), 20).unwrap().value, 2.5);
        assert_eq!(sigma_by_live_edge_sum(&g, &seeds(&g, &[0]), 20).unwrap(), 1.75);
    }

    #[test]
    fn all_seeds_give_n() {
        let g = chain(0.3, 0.9);
        assert_eq!(sigma_exact(&g, &seeds(&g, &[0, 1, 2]), 20).unwrap().value, 3.0);
    }

    #[test]
    fn empty_seed_set_is_zero() {
        let g = chain(0.3, 0.9);
        assert_eq!(sigma_exact(&g, &Solution::empty(), 20).unwrap().value, 0.0);
    }

    #[test]
    fn works_in_single_precision() {
        let mut b = GraphBuilder::<f32>::with_nodes(3);
        b.edge(NodeId(0), NodeId(1), 0.5).unwrap();
        b.edge(NodeId(1), NodeId(2), 0.5).unwrap();
        let g = b.build();
        let sol = Solution::new(&g, [NodeId(0)], []).unwrap();
        assert_eq!(sigma_exact(&g, &sol, 20).unwrap().value, 1.75f32);
    }

    #[test]
    fn limit_counts_only_reachable_uncertain_edges() {
        // 25 uncertain edges hanging off node 1, unreachable from node 0.
        let mut b = GraphBuilder::<f64>::with_nodes(27);
        for v in 2..27 {
            b.edge(NodeId(1), NodeId(v), 0.5).unwrap();
        }
        b.edge(NodeId(0), NodeId(2), 1.0).unwrap();
        let g = b.build();
        assert_eq!(branching_edge_count(&g, &seeds(&g, &[0])), 0);
        assert_eq!(sigma_exact(&g, &seeds(&g, &[0]), 20).unwrap().value, 2.0);
        assert_eq!(
            sigma_exact(&g, &seeds(&g, &[1]), 20),
            Err(SpreadError::TooManyEdges { count: 25, limit: 20 })
        );
    }

    #[test]
    fn bought_edges_count_toward_spread() {
        let mut b = GraphBuilder::<f64>::with_nodes(3);
        b.edge(NodeId(1), NodeId(2), 0.5).unwrap();
        let c = b.candidate(NodeId(0), NodeId(1), 0.5, "0.2".parse().unwrap()).unwrap();
        let g = b.build();
        let sol = Solution::new(&g, [NodeId(0)], [c]).unwrap();
        // same as the 0.5/0.5 chain
        assert_eq!(sigma_exact(&g, &sol, 20).unwrap().value, 1.75);
        assert_eq!(sigma_by_live_edge_sum(&g, &sol, 20).unwrap(), 1.75);
    }

    #[test]
    fn cascade_walk_matches_definitional_sum_on_dense_graph() {
        let mut b = GraphBuilder::<f64>::with_nodes(4);
        let ps = [0.1, 0.7, 0.35, 0.5, 0.9, 0.25, 0.6, 0.05];
        let pairs = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3), (2, 1), (3, 1)];
        for (&(u, v), &p) in pairs.iter().zip(&ps) {
            b.edge(NodeId(u), NodeId(v), p).unwrap();
        }
        let c = b.candidate(NodeId(0), NodeId(3), 0.4, "0.5".parse().unwrap()).unwrap();
        let g = b.build();
        for sol in [
            seeds(&g, &[0]),
            seeds(&g, &[1, 3]),
            Solution::new(&g, [NodeId(0)], [c]).unwrap(),
        ] {
            let a = sigma_exact(&g, &sol, 20).unwrap().value;
            let d = sigma_by_live_edge_sum(&g, &sol, 20).unwrap();
            assert_relative_eq!(a, d, epsilon = 1e-12);
        }
    }

    #[test]
    fn definitional_delta_requires_nesting() {
        let g = chain(0.5, 0.5);
        assert_eq!(
            delta_by_live_edge_sum(&g, &seeds(&g, &[0]), &seeds(&g, &[1]), 20),
            Err(SpreadError::NotNested)
        );
        let d = delta_by_live_edge_sum(&g, &seeds(&g, &[0, 1]), &seeds(&g, &[0]), 20).unwrap();
        assert_eq!(d, 0.75);
    }
}

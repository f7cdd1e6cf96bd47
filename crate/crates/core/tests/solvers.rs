use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bima::generate::{random_instance, InstanceParams};
use bima::graph::GraphBuilder;
use bima::icm::{sigma_exact, ExactEvaluator};
use bima::oracle::{brute_force_bima, brute_force_costima};
use bima::solvers::{costima_greedy, greedy_general, greedy_lb, GreedyOptions, ThresholdConfig};
use bima::{CandidateId, Graph, Money, NodeId, Solution};

fn instance(rng: &mut ChaCha8Rng, nodes: usize, candidates: usize) -> Graph {
    let lo = rng.gen_range(50_000..=1_000_000);
    let params = InstanceParams {
        nodes,
        edge_density: rng.gen_range(0.0..=0.5),
        p_min: 0.05,
        p_max: 1.0,
        candidates,
        candidate_p_min: 0.1,
        candidate_p_max: 1.0,
        cost_min: Money::from_micros(lo),
        cost_max: Money::from_micros(rng.gen_range(lo..=1_000_000)),
        seed: rng.gen(),
    };
    random_instance(&params).unwrap()
}

fn sigma(g: &Graph, sol: &Solution) -> f64 {
    sigma_exact(g, sol, 64).unwrap().value
}

fn budget(rng: &mut ChaCha8Rng) -> Money {
    Money::from_micros(rng.gen_range(0..=3_500_000))
}

fn random_feasible(rng: &mut ChaCha8Rng, g: &Graph, k: Money) -> Solution {
    let mut nodes: Vec<NodeId> = g.nodes().collect();
    nodes.shuffle(rng);
    let seeds: Vec<NodeId> = nodes
        .into_iter()
        .take(rng.gen_range(0..=k.whole_units().max(0) as usize))
        .collect();
    let mut left = k - Money::from_units(seeds.len() as i64);
    let mut pool: Vec<CandidateId> = seeds.iter().flat_map(|&a| g.candidates_from(a).to_vec()).collect();
    pool.shuffle(rng);
    let mut edges = Vec::new();
    for e in pool {
        let c = g.candidate(e).cost;
        if c <= left && rng.gen_bool(0.6) {
            left -= c;
            edges.push(e);
        }
    }
    Solution::new(g, seeds, edges).unwrap()
}

#[test]
fn lazy_and_eager_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let eval = ExactEvaluator::default();
    let lazy = GreedyOptions {
        lazy: true,
        ..GreedyOptions::default()
    };
    for _ in 0..200 {
        let (n, m) = (rng.gen_range(1..=6), rng.gen_range(0..=8));
        let g = instance(&mut rng, n, m);
        let k = budget(&mut rng);
        let a = greedy_lb(&g, k, &eval, GreedyOptions::default()).unwrap();
        let b = greedy_lb(&g, k, &eval, lazy).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn spread_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(0..=6));
        let g = instance(&mut rng, n, m);
        let big = random_feasible(&mut rng, &g, Money::from_units(6));
        let seeds: Vec<NodeId> = big.seeds().iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let edges: Vec<CandidateId> = big
            .edges()
            .iter()
            .copied()
            .filter(|&e| seeds.contains(&g.candidate(e).source) && rng.gen_bool(0.5))
            .collect();
        let small = Solution::new(&g, seeds, edges).unwrap();
        assert!(big.contains(&small));
        assert!(sigma(&g, &big) >= sigma(&g, &small) - 1e-12);
    }
}

#[test]
fn oracle_beats_random_feasible_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let g = instance(&mut rng, 5, 7);
        let k = budget(&mut rng);
        let opt = brute_force_bima(&g, k).unwrap();
        assert!((sigma(&g, &opt.best) - opt.value).abs() < 1e-12);
        for _ in 0..100 {
            let sol = random_feasible(&mut rng, &g, k);
            sol.validate(&g, k).unwrap();
            assert!(sigma(&g, &sol) <= opt.value + 1e-12);
        }
    }
}

#[test]
fn relabeling_preserves_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let g = instance(&mut rng, 5, 6);
        let n = g.node_count();
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(&mut rng);
        let map = |v: NodeId| NodeId(perm[v.index()]);

        let mut b = GraphBuilder::with_nodes(n);
        for e in g.edges() {
            b.edge(map(e.source), map(e.target), e.p).unwrap();
        }
        let mut ids = Vec::new();
        for c in g.candidates() {
            ids.push(b.candidate(map(c.source), map(c.target), c.p, c.cost).unwrap());
        }
        let h: Graph = b.build();

        let k = budget(&mut rng);
        let sol = random_feasible(&mut rng, &g, k);
        let moved = Solution::new(
            &h,
            sol.seeds().iter().map(|&v| map(v)),
            sol.edges().iter().map(|e| ids[e.index()]),
        )
        .unwrap();
        assert!((sigma(&g, &sol) - sigma(&h, &moved)).abs() < 1e-12);
        let a = brute_force_bima(&g, k).unwrap().value;
        let b = brute_force_bima(&h, k).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn edge_purchase_greedy_meets_its_guarantee() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let eval = ExactEvaluator::default();
    let factor = 0.5 * (1.0 - (-1.0f64).exp());
    let mut checked = 0;
    while checked < 100 {
        let g = instance(&mut rng, 5, 8);
        let seeds: BTreeSet<NodeId> = g.nodes().filter(|_| rng.gen_bool(0.4)).collect();
        let edge_budget = Money::from_micros(rng.gen_range(0..=2_000_000));
        let opt = match brute_force_costima(&g, &seeds, edge_budget) {
            Ok(o) => o,
            Err(_) => continue,
        };
        let bought = costima_greedy(&g, &seeds, edge_budget, &eval).unwrap();
        let spent: Money = bought.iter().map(|&e| g.candidate(e).cost).sum();
        assert!(spent <= edge_budget);
        let base = sigma(&g, &Solution::new(&g, seeds.iter().copied(), []).unwrap());
        let got = sigma(&g, &Solution::new(&g, seeds.iter().copied(), bought).unwrap());
        assert!(got - base >= factor * (opt.value - base) - 1e-12);
        checked += 1;
    }
}

#[test]
fn general_and_lower_bound_greedy_reach_everything_with_ample_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let eval = ExactEvaluator::default();
    let threshold = ThresholdConfig::new(1.6).unwrap();
    for _ in 0..20 {
        let mut b = GraphBuilder::with_nodes(4);
        for u in 0..4u32 {
            for v in 0..4u32 {
                if u == v {
                    continue;
                }
                match rng.gen_range(0..3) {
                    0 => b.edge(NodeId(u), NodeId(v), rng.gen_range(0.1..1.0)).unwrap(),
                    1 => {
                        b.candidate(NodeId(u), NodeId(v), rng.gen_range(0.1..1.0), Money::ONE)
                            .unwrap();
                    }
                    _ => {}
                }
            }
        }
        let g: Graph = b.build();
        let k = Money::from_units(4 + g.candidates().len() as i64);
        let lb = greedy_lb(&g, k, &eval, GreedyOptions::default()).unwrap();
        let gen = greedy_general(&g, k, &threshold, &eval).unwrap();
        lb.validate(&g, k).unwrap();
        gen.validate(&g, k).unwrap();
        assert!((sigma(&g, &lb) - 4.0).abs() < 1e-12);
        assert!((sigma(&g, &gen) - 4.0).abs() < 1e-12);
    }
}

#[test]
fn unit_budget_picks_the_best_single_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let eval = ExactEvaluator::default();
    for _ in 0..100 {
        let g = instance(&mut rng, 4, 5);
        let opt = brute_force_bima(&g, Money::ONE).unwrap();
        let sol = greedy_lb(&g, Money::ONE, &eval, GreedyOptions::default()).unwrap();
        assert_eq!(sol.seeds().len(), 1);
        assert!(sol.edges().is_empty());
        assert!((sigma(&g, &sol) - opt.value).abs() < 1e-12);
    }
}

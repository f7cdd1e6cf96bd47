//! Seeded random instances and on-disk instance corpora.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    load_graph, write_candidate_list, write_edge_list, CandidateSpec, GraphBuilder, GraphError,
    LoadOptions, NodeId, SocialGraph,
};
use crate::icm::derive_seed;
use crate::money::Money;
use crate::scalar::Scalar;

pub const MANIFEST_FILE: &str = "corpus.json";

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("invalid generator parameter: {0}")]
    Params(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Manifest {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// Parameters of one random instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub nodes: usize,
    /// Probability that each ordered pair `(u, v)`, `u != v`, is an existing edge.
    pub edge_density: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Number of candidate edges, capped by the number of non-edges.
    pub candidates: usize,
    pub candidate_p_min: f64,
    pub candidate_p_max: f64,
    pub cost_min: Money,
    pub cost_max: Money,
    pub seed: u64,
}

impl InstanceParams {
    fn validate(&self) -> Result<(), GenerateError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let bad = |m: &str| Err(GenerateError::Params(m.to_string()));
        if !unit(self.edge_density) {
            return bad("edge density must lie in [0, 1]");
        }
        if !(unit(self.p_min) && unit(self.p_max) && self.p_min <= self.p_max) {
            return bad("need 0 <= p_min <= p_max <= 1");
        }
        if !(unit(self.candidate_p_min)
            && unit(self.candidate_p_max)
            && self.candidate_p_min <= self.candidate_p_max)
        {
            return bad("need 0 <= candidate_p_min <= candidate_p_max <= 1");
        }
        if self.cost_min < Money::ZERO || self.cost_max > Money::ONE || self.cost_min > self.cost_max {
            return bad("need 0 <= cost_min <= cost_max <= 1");
        }
        if self.nodes > u32::MAX as usize {
            return bad("too many nodes");
        }
        Ok(())
    }
}

/// Probability drawn from `[lo, hi]`, rounded to three decimals.
fn draw_p(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let raw = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    ((raw * 1000.0).round() / 1000.0).clamp(lo, hi)
}

/// Builds the instance described by `params`; identical params give identical graphs.
pub fn random_instance<F: Scalar>(params: &InstanceParams) -> Result<SocialGraph<F>, GenerateError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.nodes as u32;
    let mut builder = GraphBuilder::<F>::with_nodes(params.nodes);
    let mut free = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            if rng.gen_bool(params.edge_density) {
                let p = draw_p(&mut rng, params.p_min, params.p_max);
                builder
                    .edge(NodeId(u), NodeId(v), F::of(p))
                    .expect("fresh pair");
            } else {
                free.push((u, v));
            }
        }
    }
    free.shuffle(&mut rng);
    free.truncate(params.candidates);
    free.sort_unstable();
    let (lo, hi) = (params.cost_min.micros(), params.cost_max.micros());
    for (u, v) in free {
        let p = draw_p(&mut rng, params.candidate_p_min, params.candidate_p_max);
        let cost = Money::from_micros(rng.gen_range(lo..=hi));
        builder
            .candidate(NodeId(u), NodeId(v), F::of(p), cost)
            .expect("pair is a non-edge");
    }
    Ok(builder.build())
}

/// One manifest line: an instance file pair and the budget to solve it at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub budget: Money,
    pub params: InstanceParams,
}

impl CorpusEntry {
    pub fn edges_file(&self) -> String {
        format!("{}.edges", self.name)
    }

    pub fn candidates_file(&self) -> String {
        format!("{}.cand", self.name)
    }
}

/// Desk-scale corpus: 3 to 5 nodes, at most 8 candidates, budgets cycling
/// through 1, 2, 3 and candidate cost floors cycling through `cost_floors`.
pub fn corpus_entries(
    count: usize,
    master_seed: u64,
    cost_floors: &[Money],
    candidate_p: (f64, f64),
) -> Vec<CorpusEntry> {
    assert!(!cost_floors.is_empty(), "at least one cost floor");
    (0..count)
        .map(|i| {
            let seed = derive_seed(master_seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nodes = rng.gen_range(3..=5);
            let candidates = rng.gen_range(1..=8);
            CorpusEntry {
                name: format!("inst_{i:03}"),
                budget: Money::from_units(1 + (i / cost_floors.len() % 3) as i64),
                params: InstanceParams {
                    nodes,
                    edge_density: 0.3,
                    p_min: 0.1,
                    p_max: 0.9,
                    candidates,
                    candidate_p_min: candidate_p.0,
                    candidate_p_max: candidate_p.1,
                    cost_min: cost_floors[i % cost_floors.len()],
                    cost_max: Money::ONE,
                    seed,
                },
            }
        })
        .collect()
}

/// The cost floors of the standard corpus: 0.2, 0.5 and 1.
pub fn standard_cost_floors() -> Vec<Money> {
    vec![Money::from_micros(200_000), Money::from_micros(500_000), Money::ONE]
}

fn write_file(path: PathBuf, text: &str) -> Result<(), GenerateError> {
    fs::write(&path, text).map_err(|source| GenerateError::Io { path, source })
}

/// Writes every instance plus a manifest into `dir` (created if missing).
pub fn write_corpus(dir: &Path, entries: &[CorpusEntry]) -> Result<(), GenerateError> {
    fs::create_dir_all(dir).map_err(|source| GenerateError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let graph = random_instance::<f64>(&entry.params)?;
        write_file(dir.join(entry.edges_file()), &write_edge_list(&graph))?;
        write_file(dir.join(entry.candidates_file()), &write_candidate_list(&graph))?;
    }
    let manifest = serde_json::to_string_pretty(entries).expect("manifest serializes");
    write_file(dir.join(MANIFEST_FILE), &(manifest + "\n"))
}

/// A corpus instance as read back from disk; parse failures are kept per instance.
#[derive(Debug)]
pub struct LoadedInstance<F> {
    pub entry: CorpusEntry,
    pub graph: Result<SocialGraph<F>, String>,
}

pub fn read_manifest(dir: &Path) -> Result<Vec<CorpusEntry>, GenerateError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|source| GenerateError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| GenerateError::Manifest { path, source })
}

/// Loads a graph from an edge file and a candidate file (or inline JSON generator config).
pub fn load_instance<F: Scalar>(edges: &Path, candidates: Option<&str>) -> Result<SocialGraph<F>, String> {
    let edge_text = fs::read_to_string(edges).map_err(|e| format!("{}: {e}", edges.display()))?;
    let spec = match candidates {
        None => CandidateSpec::None,
        Some(arg) if arg.trim_start().starts_with('{') => {
            CandidateSpec::from_text(arg).map_err(|e| e.to_string())?
        }
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            CandidateSpec::from_text(&text).map_err(|e| format!("{path}: {e}"))?
        }
    };
    load_graph(&edge_text, &spec, &LoadOptions::default()).map_err(|e: GraphError| {
        format!("{}: {e}", edges.display())
    })
}

pub fn load_corpus<F: Scalar>(dir: &Path) -> Result<Vec<LoadedInstance<F>>, GenerateError> {
    Ok(read_manifest(dir)?
        .into_iter()
        .map(|entry| {
            let cands = dir.join(entry.candidates_file());
            let graph = load_instance(
                &dir.join(entry.edges_file()),
                Some(cands.to_string_lossy().as_ref()),
            );
            LoadedInstance { entry, graph }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64) -> InstanceParams {
        InstanceParams {
            nodes: 5,
            edge_density: 0.3,
            p_min: 0.1,
            p_max: 0.9,
            candidates: 6,
            candidate_p_min: 0.2,
            candidate_p_max: 1.0,
            cost_min: Money::from_micros(200_000),
            cost_max: Money::ONE,
            seed,
        }
    }

    #[test]
    fn deterministic_and_within_ranges() {
        for seed in 0..20 {
            let a: SocialGraph<f64> = random_instance(&params(seed)).unwrap();
            let b: SocialGraph<f64> = random_instance(&params(seed)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.node_count(), 5);
            assert!(a.candidates().len() <= 6);
            for e in a.edges() {
                assert!((0.1..=0.9).contains(&e.p));
            }
            for c in a.candidates() {
                assert!((0.2..=1.0).contains(&c.p));
                assert!(c.cost >= Money::from_micros(200_000) && c.cost <= Money::ONE);
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = params(0);
        p.p_min = 0.95;
        assert!(random_instance::<f64>(&p).is_err());
        let mut p = params(0);
        p.cost_min = Money::from_units(2);
        assert!(random_instance::<f64>(&p).is_err());
    }

    #[test]
    fn corpus_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let entries = corpus_entries(6, 42, &standard_cost_floors(), (0.1, 1.0));
        assert_eq!(
            entries.iter().map(|e| e.budget.whole_units()).collect::<Vec<_>>(),
            vec![1, 1, 1, 2, 2, 2]
        );
        write_corpus(dir.path(), &entries).unwrap();
        let loaded = load_corpus::<f64>(dir.path()).unwrap();
        assert_eq!(loaded.len(), 6);
        for inst in loaded {
            let expected: SocialGraph<f64> = random_instance(&inst.entry.params).unwrap();
            assert_eq!(inst.graph.unwrap(), expected);
        }
    }
}

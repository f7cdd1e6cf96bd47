use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{write_candidate_list, write_edge_list};
use crate::icm::{delta_by_live_edge_sum, derive_seed, sigma_exact, sigma_mc, SampleBank, SpreadError};
use crate::money::Money;
use crate::oracle::brute_force_bima;
use crate::{Graph, Solution};

use super::{run_with_solution, Algorithm, EvaluatorKind, RunConfig, Threshold};

/// Uncertain-edge limit for the definitional live-edge sum.
const LIVE_EDGE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute slack on `sigma_alg >= factor * sigma_opt`.
    pub ratio: f64,
    /// Absolute tolerance between the live-edge sum and the spread difference.
    pub live_edge: f64,
    /// Absolute tolerance between Monte Carlo and exact spread.
    pub mc: f64,
    pub mc_replications: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ratio: 1e-9,
            live_edge: 1e-12,
            mc: 0.1,
            mc_replications: 20_000,
        }
    }
}

#[derive(Debug)]
pub struct VerifyInstance {
    pub name: String,
    pub budget: Money,
    pub graph: Result<Graph, String>,
}

/// Enough to rebuild a failing instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDump {
    pub budget: Money,
    pub edges: String,
    pub candidates: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyFailure {
    pub instance: String,
    pub check: String,
    pub detail: String,
    pub dump: Option<InstanceDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub instances: usize,
    pub checks: usize,
    pub passed: usize,
    pub failures: Vec<VerifyFailure>,
}

impl VerifySummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }
}

struct Outcome {
    checks: usize,
    failures: Vec<(String, String)>,
}

impl Outcome {
    fn record(&mut self, check: impl Into<String>, failure: Option<String>) {
        self.checks += 1;
        if let Some(detail) = failure {
            self.failures.push((check.into(), detail));
        }
    }
}

const SOLVERS: [Algorithm; 4] = [
    Algorithm::GreedyLb,
    Algorithm::Enum,
    Algorithm::General,
    Algorithm::SeedOnly,
];

fn check_instance(
    index: usize,
    inst: &VerifyInstance,
    graph: &Graph,
    tol: &Tolerances,
    master_seed: u64,
) -> Outcome {
    let mut out = Outcome {
        checks: 0,
        failures: Vec::new(),
    };
    let opt = match brute_force_bima(graph, inst.budget) {
        Ok(o) => o,
        Err(e) => {
            out.record("oracle", Some(e.to_string()));
            return out;
        }
    };

    let mut solutions: Vec<Solution> = vec![opt.best.clone()];
    for alg in SOLVERS {
        let config = RunConfig {
            algorithm: alg,
            budget: inst.budget,
            b: Threshold::Auto,
            evaluator: EvaluatorKind::Exact,
            master_seed,
            ..RunConfig::default()
        };
        let check = format!("ratio:{alg}");
        match run_with_solution(&config, graph) {
            Ok((report, sol)) => {
                let factor = report.bound.as_ref().map_or(0.0, |b| b.factor);
                let needed = factor * opt.value - tol.ratio;
                out.record(
                    check,
                    (report.sigma < needed).then(|| {
                        format!(
                            "sigma {} < {} x optimum {} (factor {factor})",
                            report.sigma, factor, opt.value
                        )
                    }),
                );
                solutions.push(sol);
            }
            Err(e) => out.record(check, Some(e.to_string())),
        }
    }

    for sol in &solutions {
        let seeds_only = Solution::new(graph, sol.seeds().iter().copied(), []).expect("seeds");
        for smaller in [Solution::empty(), seeds_only] {
            match live_edge_gap(graph, sol, &smaller) {
                Ok(gap) => out.record(
                    "live-edge",
                    (gap > tol.live_edge).then(|| format!("live-edge sum differs by {gap:e}")),
                ),
                Err(SpreadError::TooManyEdges { .. }) => {}
                Err(e) => out.record("live-edge", Some(e.to_string())),
            }
        }
    }

    let probe = &solutions[1.min(solutions.len() - 1)];
    let bank = SampleBank::new(derive_seed(master_seed, index as u64));
    let mc = sigma_mc(graph, probe, &bank, tol.mc_replications.max(1));
    let exact = sigma_exact(graph, probe, 64);
    match (mc, exact) {
        (Ok(mc), Ok(exact)) => {
            let gap = (mc.value - exact.value).abs();
            out.record(
                "mc",
                (gap > tol.mc).then(|| {
                    format!("Monte Carlo {} vs exact {} (gap {gap:e})", mc.value, exact.value)
                }),
            );
        }
        (Err(e), _) | (_, Err(e)) => out.record("mc", Some(e.to_string())),
    }
    out
}

fn live_edge_gap(graph: &Graph, larger: &Solution, smaller: &Solution) -> Result<f64, SpreadError> {
    let by_sum = delta_by_live_edge_sum(graph, larger, smaller, LIVE_EDGE_LIMIT)?;
    let by_sigma = sigma_exact(graph, larger, 64)?.value - sigma_exact(graph, smaller, 64)?.value;
    Ok((by_sum - by_sigma).abs())
}

/// Checks every solver's ratio against the oracle, the live-edge identity and
/// Monte Carlo convergence on each instance. Deterministic for a given `master_seed`.
pub fn verify(instances: &[VerifyInstance], tol: &Tolerances, master_seed: u64) -> VerifySummary {
    let outcomes: Vec<(Outcome, Option<InstanceDump>)> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| match &inst.graph {
            Err(e) => (
                Outcome {
                    checks: 1,
                    failures: vec![("parse".to_string(), e.clone())],
                },
                None,
            ),
            Ok(graph) => {
                let outcome = check_instance(i, inst, graph, tol, derive_seed(master_seed, i as u64));
                let dump = (!outcome.failures.is_empty()).then(|| InstanceDump {
                    budget: inst.budget,
                    edges: write_edge_list(graph),
                    candidates: write_candidate_list(graph),
                });
                (outcome, dump)
            }
        })
        .collect();

    let mut summary = VerifySummary {
        instances: instances.len(),
        checks: 0,
        passed: 0,
        failures: Vec::new(),
    };
    for (inst, (outcome, dump)) in instances.iter().zip(outcomes) {
        summary.checks += outcome.checks;
        summary.passed += outcome.checks - outcome.failures.len();
        for (check, detail) in outcome.failures {
            summary.failures.push(VerifyFailure {
                instance: inst.name.clone(),
                check,
                detail,
                dump: dump.clone(),
            });
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::NodeId;

    fn instance(name: &str) -> VerifyInstance {
        let mut b = GraphBuilder::with_nodes(4);
        b.edge(NodeId(0), NodeId(1), 0.5).unwrap();
        b.edge(NodeId(1), NodeId(2), 0.7).unwrap();
        b.candidate(NodeId(0), NodeId(3), 0.6, Money::from_micros(400_000)).unwrap();
        b.candidate(NodeId(2), NodeId(3), 0.9, Money::from_micros(250_000)).unwrap();
        VerifyInstance {
            name: name.into(),
            budget: Money::from_units(2),
            graph: Ok(b.build()),
        }
    }

    #[test]
    fn passes_with_default_tolerances() {
        let s = verify(&[instance("a"), instance("b")], &Tolerances::default(), 3);
        assert!(s.ok(), "{:#?}", s.failures);
        assert_eq!(s.instances, 2);
        assert_eq!(s.checks, s.passed);
    }

    #[test]
    fn zero_mc_tolerance_fails() {
        let tol = Tolerances {
            mc: 0.0,
            ..Tolerances::default()
        };
        let s = verify(&[instance("a")], &tol, 3);
        assert_eq!(s.failures.len(), 1);
        assert_eq!(s.failures[0].check, "mc");
        assert!(s.failures[0].dump.is_some());
    }

    #[test]
    fn parse_errors_are_itemized() {
        let bad = VerifyInstance {
            name: "broken".into(),
            budget: Money::ONE,
            graph: Err("edges:1: bad probability".into()),
        };
        let s = verify(&[instance("a"), bad], &Tolerances::default(), 3);
        assert_eq!(s.failures.len(), 1);
        assert_eq!(s.failures[0].instance, "broken");
        assert_eq!(s.failures[0].check, "parse");
    }
}

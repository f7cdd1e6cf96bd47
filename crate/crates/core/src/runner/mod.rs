//! Configured solver runs, parameter sweeps and oracle verification.

mod sweep;
mod verify;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{
    factor_general, factor_lb_greedy, factor_lb_greedy_single, factor_seed_only,
};
use crate::generate::load_instance;
use crate::graph::SolutionError;
use crate::icm::{
    required_replications, sigma_exact, MonteCarloEvaluator, SampleBank, SpreadError,
    SpreadEvaluator, DEFAULT_EXACT_LIMIT,
};
use crate::money::Money;
use crate::oracle::{brute_force_bima, OracleError};
use crate::solvers::{
    enum_greedy, greedy_general, greedy_lb, greedy_seed_only, GreedyOptions, SolveError,
    ThresholdConfig,
};
use crate::{Graph, Solution};

pub use sweep::{sweep, SweepInstance, SweepSpec, SWEEP_HEADER};
pub use verify::{
    verify, InstanceDump, Tolerances, VerifyFailure, VerifyInstance, VerifySummary,
};

/// Replications used for Monte Carlo runs when neither a count nor an error target is given.
pub const DEFAULT_REPLICATIONS: u64 = 10_000;
/// Confidence level used to size replications from `abs_err`.
pub const REPLICATION_CONFIDENCE: f64 = 0.95;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GreedyLb,
    Enum,
    General,
    SeedOnly,
    Brute,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::GreedyLb,
        Algorithm::Enum,
        Algorithm::General,
        Algorithm::SeedOnly,
        Algorithm::Brute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GreedyLb => "greedy-lb",
            Algorithm::Enum => "enum",
            Algorithm::General => "general",
            Algorithm::SeedOnly => "seed-only",
            Algorithm::Brute => "brute",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluatorKind {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Cheap-edge threshold: `auto` picks the factor-maximizing value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Threshold {
    Auto,
    Fixed(f64),
}

impl Threshold {
    pub fn resolve(self) -> Result<ThresholdConfig, SolveError> {
        match self {
            Threshold::Auto => Ok(ThresholdConfig::optimal()),
            Threshold::Fixed(b) => ThresholdConfig::new(b),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Auto => f.write_str("auto"),
            Threshold::Fixed(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threshold::Auto);
        }
        match s.parse::<f64>() {
            Ok(b) if b > 0.0 && b.is_finite() => Ok(Threshold::Fixed(b)),
            _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
        }
    }
}

impl From<Threshold> for String {
    fn from(t: Threshold) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Threshold {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub budget: Money,
    /// Prefix size for partial enumeration.
    pub prefix_size: usize,
    pub b: Threshold,
    pub evaluator: EvaluatorKind,
    pub replications: Option<u64>,
    pub abs_err: Option<f64>,
    pub master_seed: u64,
    pub lazy: bool,
    pub exact_limit: usize,
    /// Also solve with the brute-force oracle and report the ratio.
    pub with_oracle: bool,
    /// Record wall time in the report (makes output non-reproducible).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::GreedyLb,
            budget: Money::ONE,
            prefix_size: 4,
            b: Threshold::Auto,
            evaluator: EvaluatorKind::Exact,
            replications: None,
            abs_err: None,
            master_seed: 0,
            lazy: false,
            exact_limit: DEFAULT_EXACT_LIMIT,
            with_oracle: false,
            timing: false,
        }
    }
}

impl RunConfig {
    /// Monte Carlo replications implied by the config for an `n`-node graph.
    pub fn mc_replications(&self, n: usize) -> u64 {
        match (self.replications, self.abs_err) {
            (Some(r), _) => r,
            (None, Some(err)) => required_replications(n.max(1), err, REPLICATION_CONFIDENCE),
            (None, None) => DEFAULT_REPLICATIONS,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Load(String),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("{0} (the brute-force oracle is limited to small instances; pick another algorithm)")]
    Oracle(#[from] OracleError),
    #[error("solver produced an invalid solution: {0}")]
    InvalidOutput(#[from] SolutionError),
    #[error("Monte Carlo needs at least one replication")]
    ZeroReplications,
}

impl RunError {
    /// Short machine-readable error class.
    pub fn code(&self) -> &'static str {
        match self {
            RunError::Load(_) => "load",
            RunError::Oracle(OracleError::TooManyNodes { .. } | OracleError::TooManyCandidates { .. }) => {
                "oracle_limit"
            }
            RunError::Oracle(_) => "oracle",
            RunError::Solve(SolveError::Spread(SpreadError::TooManyEdges { .. })) => "exact_limit",
            RunError::Solve(SolveError::EnumerationCap { .. }) => "enumeration_cap",
            RunError::Solve(SolveError::InvalidThreshold(_)) => "invalid_threshold",
            RunError::Solve(_) => "solve",
            RunError::InvalidOutput(_) => "invalid_output",
            RunError::ZeroReplications => "zero_replications",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub algorithm: Algorithm,
    pub budget: Money,
    #[serde(rename = "M")]
    pub prefix_size: usize,
    pub b_requested: Threshold,
    /// Threshold actually used (four-move greedy only).
    pub b: Option<f64>,
    pub alpha: Option<f64>,
    pub evaluator: EvaluatorKind,
    pub replications: Option<u64>,
    pub master_seed: u64,
    pub lazy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub source: String,
    pub target: String,
    pub p: f64,
    pub cost: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub value: f64,
    pub explored: u64,
    /// `sigma / value`, or 1 when the optimum is 0.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub seeds: Vec<String>,
    pub edges: Vec<EdgeReport>,
    pub cost: Money,
    pub sigma: f64,
    pub half_width: f64,
    /// 0 for exact values.
    pub sigma_replications: u64,
    pub bound: Option<BoundReport>,
    pub oracle: Option<OracleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

pub const RUN_CSV_HEADER: &str =
    "algorithm,budget,cost,sigma,half_width,replications,bound,oracle_ratio,seeds,edges";

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn seeds_field(&self) -> String {
        self.seeds.join(";")
    }

    pub fn edges_field(&self) -> String {
        self.edges
            .iter()
            .map(|e| format!("{}->{}", e.source, e.target))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Header plus one data row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RUN_CSV_HEADER.split(',')).expect("in-memory write");
        w.write_record([
            self.config.algorithm.name().to_string(),
            self.config.budget.to_string(),
            self.cost.to_string(),
            self.sigma.to_string(),
            self.half_width.to_string(),
            self.sigma_replications.to_string(),
            self.bound.as_ref().map(|b| b.factor.to_string()).unwrap_or_default(),
            self.oracle.as_ref().map(|o| o.ratio.to_string()).unwrap_or_default(),
            self.seeds_field(),
            self.edges_field(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// True when no candidate edge can ever change the spread.
fn edges_irrelevant(graph: &Graph) -> bool {
    graph.candidates().iter().all(|c| c.p == 0.0)
}

/// The guaranteed approximation factor of `algorithm` on `graph`, if any.
pub fn applicable_bound(
    algorithm: Algorithm,
    graph: &Graph,
    prefix_size: usize,
    threshold: Option<&ThresholdConfig>,
) -> Option<BoundReport> {
    let report = |name: &str, factor: f64| {
        Some(BoundReport {
            name: name.to_string(),
            factor,
        })
    };
    if algorithm == Algorithm::Brute {
        return report("optimal", 1.0);
    }
    if edges_irrelevant(graph) && (algorithm != Algorithm::Enum || prefix_size >= 4) {
        return report("seed-greedy", 1.0 - (-1.0f64).exp());
    }
    let c_min = graph.c_min().unwrap_or(Money::ONE).to_f64();
    match algorithm {
        Algorithm::GreedyLb => report("greedy-lb", factor_lb_greedy_single(c_min).ok()?),
        Algorithm::Enum if prefix_size >= 4 => report("enum", factor_lb_greedy(c_min).ok()?),
        Algorithm::Enum => None,
        Algorithm::General => {
            let t = threshold?;
            report("general", factor_general(t.b, t.alpha).ok()?)
        }
        Algorithm::SeedOnly => report("seed-only", factor_seed_only(c_min).ok()?),
        Algorithm::Brute => unreachable!(),
    }
}

fn solve(
    config: &RunConfig,
    graph: &Graph,
    threshold: Option<&ThresholdConfig>,
    evaluator: &dyn SpreadEvaluator<f64>,
) -> Result<Solution, RunError> {
    let options = GreedyOptions {
        lazy: config.lazy,
        ..GreedyOptions::default()
    };
    let k = config.budget;
    Ok(match config.algorithm {
        Algorithm::GreedyLb => greedy_lb(graph, k, evaluator, options)?,
        Algorithm::Enum => enum_greedy(graph, k, config.prefix_size, evaluator, options)?,
        Algorithm::General => greedy_general(graph, k, threshold.expect("resolved"), evaluator)?,
        Algorithm::SeedOnly => greedy_seed_only(graph, k, evaluator)?,
        Algorithm::Brute => brute_force_bima(graph, k)?.best,
    })
}

/// Runs one configured solve on `graph` and reports the solution, its spread and bounds.
///
/// With Monte Carlo evaluation the solver sees replications `[0, R)` and the
/// reported spread comes from the disjoint window `[R, 2R)`.
pub fn run(config: &RunConfig, graph: &Graph) -> Result<RunReport, RunError> {
    run_with_solution(config, graph).map(|(report, _)| report)
}

pub(crate) fn run_with_solution(
    config: &RunConfig,
    graph: &Graph,
) -> Result<(RunReport, Solution), RunError> {
    let start = Instant::now();
    let threshold = match config.algorithm {
        Algorithm::General => Some(config.b.resolve()?),
        _ => None,
    };

    let exact = crate::icm::ExactEvaluator {
        limit: config.exact_limit,
    };
    let (solution, estimate, replications) = match config.evaluator {
        EvaluatorKind::Exact => {
            let sol = solve(config, graph, threshold.as_ref(), &exact)?;
            let est = sigma_exact(graph, &sol, config.exact_limit).map_err(SolveError::from)?;
            (sol, est, None)
        }
        EvaluatorKind::Mc => {
            let r = config.mc_replications(graph.node_count());
            if r == 0 {
                return Err(RunError::ZeroReplications);
            }
            let selection = MonteCarloEvaluator::new(SampleBank::new(config.master_seed), r);
            let sol = solve(config, graph, threshold.as_ref(), &selection)?;
            let est = selection
                .next_window()
                .sigma(graph, &sol)
                .map_err(SolveError::from)?;
            (sol, est, Some(r))
        }
    };
    solution.validate(graph, config.budget)?;

    let oracle = if config.with_oracle || config.algorithm == Algorithm::Brute {
        let opt = brute_force_bima(graph, config.budget)?;
        let ratio = if opt.value > 0.0 {
            estimate.value / opt.value
        } else {
            1.0
        };
        Some(OracleReport {
            value: opt.value,
            explored: opt.explored,
            ratio,
        })
    } else {
        None
    };

    let report = RunReport {
        config: ConfigEcho {
            algorithm: config.algorithm,
            budget: config.budget,
            prefix_size: config.prefix_size,
            b_requested: config.b,
            b: threshold.map(|t| t.b),
            alpha: threshold.map(|t| t.alpha),
            evaluator: config.evaluator,
            replications,
            master_seed: config.master_seed,
            lazy: config.lazy,
        },
        seeds: solution
            .seeds()
            .iter()
            .map(|&a| graph.label(a).to_string())
            .collect(),
        edges: solution
            .edges()
            .iter()
            .map(|&e| {
                let c = graph.candidate(e);
                EdgeReport {
                    source: graph.label(c.source).to_string(),
                    target: graph.label(c.target).to_string(),
                    p: c.p,
                    cost: c.cost,
                }
            })
            .collect(),
        cost: solution.cost(),
        sigma: estimate.value,
        half_width: estimate.half_width,
        sigma_replications: estimate.replications,
        bound: applicable_bound(config.algorithm, graph, config.prefix_size, threshold.as_ref()),
        oracle,
        wall_time_ms: config
            .timing
            .then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Ok((report, solution))
}

/// [`run`] on an instance read from disk.
pub fn run_files(
    config: &RunConfig,
    edges: &Path,
    candidates: Option<&str>,
) -> Result<RunReport, RunError> {
    let graph = load_instance(edges, candidates).map_err(RunError::Load)?;
    run(config, &graph)
}

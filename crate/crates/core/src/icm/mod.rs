//! Spread evaluation under the independent cascade model.
//!
//! The cascade from a seed set is equivalent to reachability in a random
//! live-edge graph, so every evaluator here reduces to counting nodes reached
//! from the seeds over a sampled (or enumerated) set of live edges.

mod bank;
mod exact;
mod mc;
mod reach;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{SocialGraph, Solution};
use crate::scalar::Scalar;

pub use bank::{derive_seed, LiveEdgeSample, SampleBank};
pub use exact::{
    branching_edge_count, delta_by_live_edge_sum, sigma_by_live_edge_sum, sigma_exact,
    DEFAULT_EXACT_LIMIT,
};
pub use mc::{required_replications, sigma_mc, sigma_mc_window};
pub use reach::{reachable, Liveness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpreadError {
    #[error("{count} uncertain edges exceed the exact-evaluation limit of {limit}; use the Monte Carlo evaluator")]
    TooManyEdges { count: usize, limit: usize },
    #[error("delta requires the second solution to be nested inside the first")]
    NotNested,
    #[error("at least one replication is required")]
    ZeroReplications,
}

/// Expected number of active nodes.
///
/// Exact values carry `replications == 0` and `half_width == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate<F> {
    pub value: F,
    pub replications: u64,
    /// 95% confidence half-width.
    pub half_width: F,
}

impl<F: Scalar> SpreadEstimate<F> {
    pub fn exact(value: F) -> Self {
        SpreadEstimate {
            value,
            replications: 0,
            half_width: F::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.replications == 0
    }
}

/// Something that can estimate `σ(A, S)`.
pub trait SpreadEvaluator<F: Scalar>: Sync {
    fn sigma(
        &self,
        graph: &SocialGraph<F>,
        sol: &Solution,
    ) -> Result<SpreadEstimate<F>, SpreadError>;
}

/// Exact expectation by cascade enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactEvaluator {
    pub limit: usize,
}

impl Default for ExactEvaluator {
    fn default() -> Self {
        ExactEvaluator {
            limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

impl<F: Scalar> SpreadEvaluator<F> for ExactEvaluator {
    fn sigma(
        &self,
        graph: &SocialGraph<F>,
        sol: &Solution,
    ) -> Result<SpreadEstimate<F>, SpreadError> {
        sigma_exact(graph, sol, self.limit)
    }
}

/// Monte Carlo estimate over a fixed window of bank replications.
///
/// All solutions evaluated through the same evaluator share coin flips on
/// shared edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloEvaluator {
    pub bank: SampleBank,
    pub first_replication: u64,
    pub replications: u64,
}

impl MonteCarloEvaluator {
    pub fn new(bank: SampleBank, replications: u64) -> Self {
        MonteCarloEvaluator {
            bank,
            first_replication: 0,
            replications,
        }
    }

    /// Evaluator over the replications immediately after this window.
    pub fn next_window(&self) -> Self {
        MonteCarloEvaluator {
            first_replication: self.first_replication + self.replications,
            ..*self
        }
    }
}

impl<F: Scalar> SpreadEvaluator<F> for MonteCarloEvaluator {
    fn sigma(
        &self,
        graph: &SocialGraph<F>,
        sol: &Solution,
    ) -> Result<SpreadEstimate<F>, SpreadError> {
        sigma_mc_window(graph, sol, &self.bank, self.first_replication, self.replications)
    }
}

/// `δ(A1, S1, A2, S2) = σ(A1, S1) − σ(A2, S2)` for nested solutions.
pub fn delta<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    larger: &Solution,
    smaller: &Solution,
    evaluator: &E,
) -> Result<F, SpreadError> {
    if !larger.contains(smaller) {
        return Err(SpreadError::NotNested);
    }
    if larger == smaller {
        return Ok(F::zero());
    }
    Ok(evaluator.sigma(graph, larger)?.value - evaluator.sigma(graph, smaller)?.value)
}

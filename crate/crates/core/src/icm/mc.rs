use rayon::prelude::*;

use crate::graph::{SocialGraph, Solution};
use crate::scalar::Scalar;

use super::bank::SampleBank;
use super::reach::Reacher;
use super::{SpreadError, SpreadEstimate};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Monte Carlo `σ(A, S)` over replications `0..replications` of `bank`.
pub fn sigma_mc<F: Scalar>(
    graph: &SocialGraph<F>,
    sol: &Solution,
    bank: &SampleBank,
    replications: u64,
) -> Result<SpreadEstimate<F>, SpreadError> {
    sigma_mc_window(graph, sol, bank, 0, replications)
}

/// Monte Carlo `σ(A, S)` over replications `first..first + replications`.
///
/// Replications run in parallel but are reduced in replication order, so the
/// result is bit-identical for identical inputs.
pub fn sigma_mc_window<F: Scalar>(
    graph: &SocialGraph<F>,
    sol: &Solution,
    bank: &SampleBank,
    first: u64,
    replications: u64,
) -> Result<SpreadEstimate<F>, SpreadError> {
    if replications == 0 {
        return Err(SpreadError::ZeroReplications);
    }
    if sol.seeds().is_empty() {
        return Ok(SpreadEstimate {
            value: F::zero(),
            replications,
            half_width: F::zero(),
        });
    }
    let n = graph.node_count();
    let counts: Vec<u32> = (first..first + replications)
        .into_par_iter()
        .map_init(
            || Reacher::new(n),
            |reacher, r| reacher.count(graph, sol, &bank.sample(r)) as u32,
        )
        .collect();
    let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    let r = replications as f64;
    let mean = total as f64 / r;
    let half_width = if replications > 1 {
        let ss: f64 = counts.iter().map(|&c| (f64::from(c) - mean).powi(2)).sum();
        Z_95 * (ss / (r - 1.0)).sqrt() / r.sqrt()
    } else {
        n as f64
    };
    Ok(SpreadEstimate {
        value: F::of(mean),
        replications,
        half_width: F::of(half_width),
    })
}

/// Replications sufficient for `|estimate − σ| ≤ abs_err` with probability
/// `confidence`, by Hoeffding's inequality on spreads bounded in `[0, n]`.
///
/// Panics unless `abs_err > 0` and `0 < confidence < 1`.
pub fn required_replications(n: usize, abs_err: f64, confidence: f64) -> u64 {
    assert!(abs_err > 0.0, "abs_err must be positive");
    assert!(
        confidence > 0.0 && confidence < 1.0,
        "confidence must lie in (0, 1)"
    );
    let n = n as f64;
    let r = (n * n * (2.0 / (1.0 - confidence)).ln() / (2.0 * abs_err * abs_err)).ceil();
    (r as u64).max(1)
}

//! Budgeted influence maximization with edge augmentation.
//!
//! Pick seed nodes (cost 1 each) and new edges leaving those seeds (each with
//! its own cost) under a shared budget, maximizing the expected number of
//! nodes activated under the independent cascade model.
//!
//! The core is generic over the float type through [`Scalar`]; the aliases
//! below fix it to `f64` (or `f32`) for everyday use.

pub mod bounds;
pub mod generate;
pub mod graph;
pub mod icm;
pub mod money;
pub mod oracle;
pub mod runner;
pub mod scalar;
pub mod solvers;

pub use graph::{CandidateId, NodeId, Solution};
pub use money::Money;
pub use scalar::Scalar;

pub type Graph = graph::SocialGraph<f64>;
pub type Graph32 = graph::SocialGraph<f32>;
pub type Estimate = icm::SpreadEstimate<f64>;
pub type Estimate32 = icm::SpreadEstimate<f32>;
pub type Move = solvers::CandidateMove<f64>;
pub type Oracle = oracle::OracleResult<f64>;

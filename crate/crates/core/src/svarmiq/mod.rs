//! SVARM-IQ: stratified estimation of cardinal interaction indices.
//!
//! Every index `I_K` is a weighted combination of strata means
//! `I_{K,ℓ}^W`, the average of `v(S ∪ W)` over all `S ⊆ N \ K` of size `ℓ`.
//! A single evaluated coalition `A` belongs to exactly one stratum of each
//! `K` (`W = A ∩ K`, `ℓ = |A| - |W|`), so one evaluation updates an estimate
//! of every interaction set at once.
//!
//! Small and large coalition sizes are enumerated exhaustively up front
//! (see [`plan_borders`]), the remaining sizes are sampled.

mod borders;
mod distribution;
mod estimator;
mod strata;

pub use borders::{compute_borders, evaluate_borders, plan_borders, BorderPlan};
pub use distribution::SizeDistribution;
pub use estimator::{
    run_svarm_iq, warmup, Diagnostics, DistributionChoice, EstimatorConfig, SvarmIqOutput,
};
pub use strata::{stratum_assign, update_mean, StrataTable};

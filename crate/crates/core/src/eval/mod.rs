//! Error metrics and the theoretical guarantees of the stratified estimator.

mod bounds;
mod metrics;

pub use bounds::{
    chebyshev_bound, gamma_factor, hoeffding_bound, leftover_budget, strata_statistics,
    variance_bound, ProbabilityBound, StrataStats, STATS_MAX_PLAYERS,
};
pub use metrics::{mean_and_se, mse, prec_at, PREC_DEFAULT};

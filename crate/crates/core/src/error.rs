use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("player count {n} outside the supported range 1..={max}")]
    PlayerCount { n: usize, max: usize },
    #[error("invalid order k={k} for n={n}")]
    InvalidOrder { n: usize, k: usize },
    #[error("the Shapley value is only defined for order 1, got k={0}")]
    ShapleyOrder(usize),
    #[error("coalition {bits:#x} has players outside 0..{n}")]
    CoalitionOutOfRange { bits: u64, n: usize },
    #[error("coalition sets overlap")]
    Overlap,
    #[error("budget exceeded: {budget} evaluations allowed")]
    BudgetExceeded { budget: u64 },
    #[error("insufficient budget: {needed} evaluations needed, {available} available")]
    InsufficientBudget { needed: u64, available: u64 },
    #[error("leftover budget must be positive, got {0}")]
    NonPositiveLeftover(i64),
    #[error("estimate maps have mismatched keys")]
    KeyMismatch,
    #[error("missing interaction order {0}")]
    MissingOrder(usize),
    #[error("size distribution is not symmetric")]
    AsymmetricDistribution,
    #[error("{0}")]
    Unsupported(&'static str),
}

//! Cardinal interaction indices of cooperative games.
//!
//! The crate covers the whole pipeline from a value function to scored
//! interactions:
//!
//! * [`game`]: coalition value functions (sum-of-unanimity games, dense
//!   tables) and a budget-enforcing oracle wrapper.
//! * [`index`]: weight profiles of the Shapley, Shapley-Taylor, Faithful
//!   Shapley and Banzhaf interaction indices, exact ground truth by
//!   enumeration or unanimity closed form, and n-SII aggregation.
//! * [`svarmiq`]: the stratified SVARM-IQ estimator.
//! * [`baselines`]: permutation-sampling estimators for SII and STI.
//! * [`eval`]: error metrics and the variance / tail bounds of the
//!   stratified estimator.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod coalition;
pub mod combinatorics;
pub mod error;
pub mod eval;
pub mod game;
pub mod index;
pub mod rng;
pub mod svarmiq;

pub use coalition::Coalition;
pub use error::{Error, Result};
pub use game::{BudgetedOracle, Game, SoumGame, TabularGame};
pub use index::{EstimateMap, IndexKind, WeightProfile};

/// Largest supported player count; one coalition fits in a machine word.
pub const MAX_PLAYERS: usize = 32;

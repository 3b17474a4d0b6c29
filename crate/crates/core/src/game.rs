use alloc::vec::Vec;

use rand::Rng as _;

use crate::coalition::{check_players, Coalition};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A cooperative game: a value for every coalition of `players()` players.
///
/// Implementations are immutable and can be shared across threads for
/// concurrent evaluation.
pub trait Game {
    fn players(&self) -> usize;
    fn value(&self, coalition: Coalition) -> f64;
}

impl<G: Game + ?Sized> Game for &G {
    fn players(&self) -> usize {
        (**self).players()
    }

    fn value(&self, coalition: Coalition) -> f64 {
        (**self).value(coalition)
    }
}

/// Sum of unanimity games: `v(S) = sum_d c_d [T_d ⊆ S]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoumGame {
    n: usize,
    terms: Vec<(Coalition, f64)>,
}

impl SoumGame {
    pub fn new(n: usize, terms: Vec<(Coalition, f64)>) -> Result<Self> {
        check_players(n)?;
        for &(t, _) in &terms {
            Coalition::from_bits(t.bits(), n)?;
        }
        Ok(SoumGame { n, terms })
    }

    /// Draws `num_terms` subsets uniformly from the power set (the empty set
    /// and the grand coalition included) with coefficients uniform in `[0, 1)`.
    pub fn generate(n: usize, num_terms: usize, seed: u64) -> Result<Self> {
        check_players(n)?;
        let mut rng = rng_from_seed(seed);
        let mask = Coalition::full(n).bits();
        let terms = (0..num_terms)
            .map(|_| {
                let bits = rng.gen::<u64>() & mask;
                let coef: f64 = rng.gen();
                (Coalition::from_bits_unchecked(bits), coef)
            })
            .collect();
        Ok(SoumGame { n, terms })
    }

    pub fn terms(&self) -> &[(Coalition, f64)] {
        &self.terms
    }
}

impl Game for SoumGame {
    fn players(&self) -> usize {
        self.n
    }

    fn value(&self, coalition: Coalition) -> f64 {
        self.terms
            .iter()
            .filter(|(t, _)| t.is_subset_of(coalition))
            .map(|(_, c)| c)
            .sum()
    }
}

/// A game stored as a dense table of `2^n` values indexed by coalition bits.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularGame {
    n: usize,
    values: Vec<f64>,
}

impl TabularGame {
    /// Largest player count a dense table may hold.
    pub const MAX_PLAYERS: usize = 24;

    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_players(n)?;
        if n > Self::MAX_PLAYERS {
            return Err(Error::PlayerCount { n, max: Self::MAX_PLAYERS });
        }
        if values.len() != 1usize << n {
            return Err(Error::InvalidParameter("table length must be 2^n"));
        }
        Ok(TabularGame { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(Coalition) -> f64) -> Result<Self> {
        check_players(n)?;
        if n > Self::MAX_PLAYERS {
            return Err(Error::PlayerCount { n, max: Self::MAX_PLAYERS });
        }
        let values = (0..1u64 << n).map(|b| f(Coalition::from_bits_unchecked(b))).collect();
        Ok(TabularGame { n, values })
    }

    /// Tabulates any game by full enumeration.
    pub fn from_game<G: Game + ?Sized>(game: &G) -> Result<Self> {
        Self::from_fn(game.players(), |s| game.value(s))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Game for TabularGame {
    fn players(&self) -> usize {
        self.n
    }

    #[inline]
    fn value(&self, coalition: Coalition) -> f64 {
        self.values[coalition.bits() as usize]
    }
}

/// Wraps a game and refuses evaluations beyond a fixed budget.
///
/// Every call counts, repeated coalitions included.
#[derive(Debug)]
pub struct BudgetedOracle<'g, G: ?Sized> {
    game: &'g G,
    budget: u64,
    used: u64,
}

impl<'g, G: Game + ?Sized> BudgetedOracle<'g, G> {
    pub fn new(game: &'g G, budget: u64) -> Self {
        BudgetedOracle { game, budget, used: 0 }
    }

    pub fn evaluate(&mut self, coalition: Coalition) -> Result<f64> {
        if self.used >= self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        self.used += 1;
        Ok(self.game.value(coalition))
    }

    #[inline]
    pub fn players(&self) -> usize {
        self.game.players()
    }

    pub fn game(&self) -> &'g G {
        self.game
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn calls_used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.used
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(p: &[usize], n: usize) -> Coalition {
        Coalition::from_players(p.iter().copied(), n).unwrap()
    }

    #[test]
    fn empty_soum_is_zero() {
        let g = SoumGame::generate(8, 0, 7).unwrap();
        assert!((0..256u64).all(|b| g.value(Coalition::from_bits_unchecked(b)) == 0.0));
    }

    #[test]
    fn soum_generation_is_deterministic() {
        let a = SoumGame::generate(8, 50, 7).unwrap();
        let b = SoumGame::generate(8, 50, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, SoumGame::generate(8, 50, 8).unwrap());
    }

    #[test]
    fn soum_coefficients_in_unit_interval() {
        let g = SoumGame::generate(10, 50, 1).unwrap();
        assert_eq!(g.terms().len(), 50);
        assert!(g.terms().iter().all(|&(_, c)| (0.0..1.0).contains(&c)));
        assert!(g.terms().iter().all(|&(t, _)| t.bits() < 1 << 10));
    }

    #[test]
    fn soum_rejects_bad_n() {
        assert!(SoumGame::generate(0, 5, 1).is_err());
        assert!(SoumGame::generate(33, 5, 1).is_err());
        assert!(SoumGame::new(3, alloc::vec![(Coalition::from_bits_unchecked(0b1000), 1.0)]).is_err());
    }

    #[test]
    fn soum_evaluate_containment() {
        let g = SoumGame::new(4, alloc::vec![(set(&[0, 1], 4), 0.5)]).unwrap();
        assert_eq!(g.value(set(&[0, 1, 2], 4)), 0.5);
        assert_eq!(g.value(set(&[0], 4)), 0.0);
        let g = SoumGame::generate(6, 20, 3).unwrap();
        let total: f64 = g.terms().iter().map(|t| t.1).sum();
        assert!((g.value(Coalition::full(6)) - total).abs() < 1e-12);
    }

    #[test]
    fn oracle_counts_and_stops() {
        let g = SoumGame::generate(4, 5, 1).unwrap();
        let mut o = BudgetedOracle::new(&g, 1);
        assert!(o.evaluate(Coalition::EMPTY).is_ok());
        assert_eq!(o.calls_used(), 1);
        assert_eq!(o.evaluate(Coalition::EMPTY), Err(Error::BudgetExceeded { budget: 1 }));
        assert_eq!(o.calls_used(), 1);

        let mut o = BudgetedOracle::new(&g, 16);
        for b in 0..16 {
            o.evaluate(Coalition::from_bits_unchecked(b)).unwrap();
        }
        assert_eq!(o.calls_used(), 16);
        assert_eq!(o.remaining(), 0);
    }

    #[test]
    fn tabular_lookup() {
        let t = TabularGame::new(2, alloc::vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(t.value(Coalition::full(2)), 3.0);
        assert!(TabularGame::new(2, alloc::vec![0.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn soum_is_monotone(seed in any::<u64>(), s in 0u64..256, t in 0u64..256) {
            let g = SoumGame::generate(8, 30, seed).unwrap();
            let small = Coalition::from_bits_unchecked(s & t);
            let big = Coalition::from_bits_unchecked(s | t);
            prop_assert!(g.value(small) <= g.value(big) + 1e-12);
        }

        #[test]
        fn soum_empty_value_is_empty_terms(seed in any::<u64>()) {
            let g = SoumGame::generate(5, 40, seed).unwrap();
            let expected: f64 = g.terms().iter().filter(|t| t.0.is_empty()).map(|t| t.1).sum();
            prop_assert_eq!(g.value(Coalition::EMPTY), expected);
        }
    }
}

//! Permutation-sampling estimators for SII and top-order STI.
//!
//! Both draw uniform permutations and evaluate discrete derivatives along
//! them. Values are cached within one permutation only, so a coalition
//! shared by several windows of the same permutation costs one oracle call.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::coalition::{colex_rank, Coalition};
use crate::error::{Error, Result};
use crate::game::{BudgetedOracle, Game};
use crate::index::{check_order, EstimateMap, IndexKind};
use crate::rng::rng_from_seed;
use crate::svarmiq::update_mean;

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOutput {
    pub estimates: EstimateMap,
    /// Derivative samples folded into each key, in colex order.
    pub counts: Vec<u64>,
    /// Permutations touched, the last one possibly partially.
    pub permutations: u64,
    pub calls: u64,
}

impl PermutationOutput {
    /// Keys that never received a sample and report 0.
    pub fn never_updated(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }
}

/// Value cache for one permutation.
#[derive(Debug, Default)]
struct PermutationCache {
    values: BTreeMap<u64, f64>,
}

impl PermutationCache {
    fn clear(&mut self) {
        self.values.clear();
    }

    fn missing(&self, s: Coalition, key: Coalition) -> u64 {
        key.subsets()
            .filter(|w| !self.values.contains_key(&s.union(*w).bits()))
            .count() as u64
    }

    fn value<G: Game + ?Sized>(&mut self, oracle: &mut BudgetedOracle<'_, G>, a: Coalition) -> Result<f64> {
        if let Some(&v) = self.values.get(&a.bits()) {
            return Ok(v);
        }
        let v = oracle.evaluate(a)?;
        self.values.insert(a.bits(), v);
        Ok(v)
    }

    fn derivative<G: Game + ?Sized>(
        &mut self,
        oracle: &mut BudgetedOracle<'_, G>,
        key: Coalition,
        s: Coalition,
    ) -> Result<f64> {
        let k = key.len();
        let mut total = 0.0;
        for w in key.subsets() {
            let v = self.value(oracle, s.union(w))?;
            if (k - w.len()) % 2 == 0 {
                total += v;
            } else {
                total -= v;
            }
        }
        Ok(total)
    }
}

fn bits_of(players: &[u8]) -> Coalition {
    Coalition::from_bits_unchecked(players.iter().fold(0u64, |acc, &p| acc | 1 << p))
}

/// SII by consecutive windows: in a uniform permutation, each block of `k`
/// adjacent players `K` yields the sample `Δ_K(S)` with `S` the players in
/// front of the block.
///
/// Runs until the next window's uncached evaluations no longer fit in the
/// remaining budget; a permutation cut short keeps the windows it finished.
pub fn permutation_sii<G: Game + ?Sized>(
    oracle: &mut BudgetedOracle<'_, G>,
    k: usize,
    seed: u64,
) -> Result<PermutationOutput> {
    let n = oracle.players();
    check_order(n, k)?;
    let kind = if k == 1 { IndexKind::Sv } else { IndexKind::Sii };
    let mut estimates = EstimateMap::zeros(n, k, kind)?;
    let mut counts = alloc::vec![0u64; estimates.len()];
    let mut rng = rng_from_seed(seed);
    let mut perm: Vec<u8> = (0..n as u8).collect();
    let mut cache = PermutationCache::default();
    let start = oracle.calls_used();
    let mut permutations = 0;

    'outer: loop {
        perm.shuffle(&mut rng);
        cache.clear();
        let mut touched = false;
        for t in 0..=n - k {
            let key = bits_of(&perm[t..t + k]);
            let s = bits_of(&perm[..t]);
            if cache.missing(s, key) > oracle.remaining() {
                if touched {
                    permutations += 1;
                }
                break 'outer;
            }
            touched = true;
            let delta = cache.derivative(oracle, key, s)?;
            let r = colex_rank(key);
            let scores = estimates.scores_mut();
            scores[r] = update_mean(scores[r], counts[r], delta);
            counts[r] += 1;
        }
        permutations += 1;
    }

    if counts.iter().all(|&c| c == 0) {
        return Err(Error::InsufficientBudget { needed: 1 << k, available: oracle.budget() - start });
    }
    Ok(PermutationOutput { estimates, counts, permutations, calls: oracle.calls_used() - start })
}

/// Top-order STI: every permutation gives each `K` the sample `Δ_K(S)` with
/// `S` the players preceding the first member of `K`.
///
/// A permutation is only started when all of its uncached evaluations fit
/// in the remaining budget.
pub fn permutation_sti<G: Game + ?Sized>(
    oracle: &mut BudgetedOracle<'_, G>,
    k: usize,
    seed: u64,
) -> Result<PermutationOutput> {
    let n = oracle.players();
    check_order(n, k)?;
    let kind = if k == 1 { IndexKind::Sv } else { IndexKind::Sti };
    let mut estimates = EstimateMap::zeros(n, k, kind)?;
    let keys: Vec<Coalition> = estimates.keys().collect();
    let mut counts = alloc::vec![0u64; keys.len()];
    let mut rng = rng_from_seed(seed);
    let mut perm: Vec<u8> = (0..n as u8).collect();
    let mut position = alloc::vec![0usize; n];
    let mut prefixes = alloc::vec![Coalition::EMPTY; n + 1];
    let mut preds = alloc::vec![Coalition::EMPTY; keys.len()];
    let mut needed: Vec<u64> = Vec::new();
    let mut cache = PermutationCache::default();
    let start = oracle.calls_used();
    let mut permutations = 0;

    loop {
        perm.shuffle(&mut rng);
        for (i, &p) in perm.iter().enumerate() {
            position[p as usize] = i;
            prefixes[i + 1] = prefixes[i].with(p as usize);
        }
        needed.clear();
        for (pred, &key) in preds.iter_mut().zip(&keys) {
            let first = key.players().map(|p| position[p]).min().expect("non-empty key");
            *pred = prefixes[first];
            needed.extend(key.subsets().map(|w| pred.union(w).bits()));
        }
        needed.sort_unstable();
        needed.dedup();
        if needed.len() as u64 > oracle.remaining() {
            break;
        }
        cache.clear();
        for (r, (&key, &pred)) in keys.iter().zip(&preds).enumerate() {
            let delta = cache.derivative(oracle, key, pred)?;
            let scores = estimates.scores_mut();
            scores[r] = update_mean(scores[r], counts[r], delta);
            counts[r] += 1;
        }
        permutations += 1;
    }

    if permutations == 0 {
        return Err(Error::InsufficientBudget {
            needed: needed.len() as u64,
            available: oracle.budget() - start,
        });
    }
    Ok(PermutationOutput { estimates, counts, permutations, calls: oracle.calls_used() - start })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{SoumGame, TabularGame};
    use crate::index::exact_cii;

    fn set(p: &[usize], n: usize) -> Coalition {
        Coalition::from_players(p.iter().copied(), n).unwrap()
    }

    #[test]
    fn window_cache_example() {
        // permutation (1, 0, 2): windows {0,1} after ∅ and {0,2} after {1}
        let g = SoumGame::generate(3, 4, 1).unwrap();
        let mut oracle = BudgetedOracle::new(&g, 100);
        let mut cache = PermutationCache::default();
        let perm: [u8; 3] = [1, 0, 2];
        let mut deltas = Vec::new();
        for t in 0..2 {
            let key = bits_of(&perm[t..t + 2]);
            let s = bits_of(&perm[..t]);
            deltas.push((key, s, cache.derivative(&mut oracle, key, s).unwrap()));
        }
        assert_eq!(deltas[0].0, set(&[0, 1], 3));
        assert_eq!(deltas[0].1, Coalition::EMPTY);
        assert_eq!(deltas[1].0, set(&[0, 2], 3));
        assert_eq!(deltas[1].1, set(&[1], 3));
        assert_eq!(oracle.calls_used(), 6);
        let mut keys: Vec<u64> = cache.values.keys().copied().collect();
        keys.sort_unstable();
        assert_eq!(keys, alloc::vec![0b000, 0b001, 0b010, 0b011, 0b110, 0b111]);
    }

    #[test]
    fn sii_spends_budget_and_is_deterministic() {
        let g = SoumGame::generate(8, 50, 11).unwrap();
        let mut o1 = BudgetedOracle::new(&g, 200);
        let a = permutation_sii(&mut o1, 2, 3).unwrap();
        let b = permutation_sii(&mut BudgetedOracle::new(&g, 200), 2, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.calls, o1.calls_used());
        assert!(a.calls <= 200);
        // a full permutation costs 2n distinct evaluations
        assert!(a.calls >= 200 - 3);
        assert_eq!(a.counts.iter().sum::<u64>(), 12 * 7 + 3);
    }

    #[test]
    fn sti_permutation_cost() {
        let g = SoumGame::generate(8, 50, 11).unwrap();
        let mut oracle = BudgetedOracle::new(&g, 200);
        let out = permutation_sti(&mut oracle, 2, 1).unwrap();
        assert_eq!(out.permutations, 5);
        assert_eq!(out.calls, 5 * 37);
        assert!(out.counts.iter().all(|&c| c == 5));
    }

    #[test]
    fn additive_game_has_no_interactions() {
        let g = TabularGame::from_fn(6, |s| s.players().map(|p| p as f64 + 0.5).sum()).unwrap();
        let sii = permutation_sii(&mut BudgetedOracle::new(&g, 300), 2, 8).unwrap();
        let sti = permutation_sti(&mut BudgetedOracle::new(&g, 300), 2, 8).unwrap();
        assert!(sii.estimates.scores().iter().all(|v| v.abs() < 1e-12));
        assert!(sti.estimates.scores().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn whole_permutations_are_efficient_at_order_one() {
        let g = TabularGame::from_fn(5, |s| (s.len() * s.len()) as f64).unwrap();
        for out in [
            // six whole permutations of 6 distinct evaluations each
            permutation_sii(&mut BudgetedOracle::new(&g, 36), 1, 2).unwrap(),
            permutation_sti(&mut BudgetedOracle::new(&g, 36), 1, 2).unwrap(),
        ] {
            assert_eq!(out.permutations, 6);
            assert!(out.counts.iter().all(|&c| c == 6));
            let total: f64 = out.estimates.scores().iter().sum();
            assert!((total - 25.0).abs() < 1e-12);
        }
    }

    #[test]
    fn many_permutations_approach_truth() {
        let g = SoumGame::generate(6, 20, 4).unwrap();
        let sii = exact_cii(&g, IndexKind::Sii, 2).unwrap();
        let sti = exact_cii(&g, IndexKind::Sti, 2).unwrap();
        let a = permutation_sii(&mut BudgetedOracle::new(&g, 300_000), 2, 1).unwrap();
        let b = permutation_sti(&mut BudgetedOracle::new(&g, 300_000), 2, 1).unwrap();
        let (da, db) = (a.estimates.max_abs_diff(&sii).unwrap(), b.estimates.max_abs_diff(&sti).unwrap());
        assert!(da < 0.05 && db < 0.05, "{da} {db}");
    }

    #[test]
    fn too_small_budget_is_an_error() {
        let g = SoumGame::generate(6, 20, 4).unwrap();
        assert!(matches!(
            permutation_sii(&mut BudgetedOracle::new(&g, 3), 2, 0),
            Err(Error::InsufficientBudget { needed: 4, .. })
        ));
        assert!(permutation_sii(&mut BudgetedOracle::new(&g, 4), 2, 0).is_ok());
        assert!(matches!(
            permutation_sti(&mut BudgetedOracle::new(&g, 20), 2, 0),
            Err(Error::InsufficientBudget { needed: 22, .. })
        ));
        assert!(permutation_sii(&mut BudgetedOracle::new(&g, 100), 7, 0).is_err());
    }
}

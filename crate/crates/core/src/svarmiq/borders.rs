use alloc::vec;
use alloc::vec::Vec;

use crate::coalition::k_subsets;
use crate::combinatorics::{binomial, binomial_u64};
use crate::error::{Error, Result};
use crate::game::{BudgetedOracle, Game};

use super::distribution::SizeDistribution;
use super::strata::{inverse_binomials, StrataTable};

/// Relative slack on the border growth test so that exact ties such as
/// `C(n, s) = P(s) * B` survive rounding of `P(s)`.
const GROWTH_TOLERANCE: f64 = 1e-12;

/// Which coalition sizes are enumerated exhaustively and which are sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderPlan {
    n: usize,
    budget: u64,
    s_exp: usize,
    explicit: Vec<bool>,
    leftover: u64,
    distribution: SizeDistribution,
}

impl BorderPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Largest small size evaluated exhaustively.
    pub fn s_exp(&self) -> usize {
        self.s_exp
    }

    /// Budget left after enumerating the explicit sizes.
    pub fn leftover(&self) -> u64 {
        self.leftover
    }

    /// Size distribution renormalized onto the implicit sizes.
    pub fn distribution(&self) -> &SizeDistribution {
        &self.distribution
    }

    pub fn explicit_mask(&self) -> &[bool] {
        &self.explicit
    }

    #[inline]
    pub fn is_explicit(&self, size: usize) -> bool {
        self.explicit[size]
    }

    pub fn explicit_sizes(&self) -> Vec<usize> {
        (0..=self.n).filter(|&s| self.explicit[s]).collect()
    }

    pub fn implicit_sizes(&self) -> Vec<usize> {
        (0..=self.n).filter(|&s| !self.explicit[s]).collect()
    }

    /// `Σ_{s ∈ S_exp} C(n, s)`.
    pub fn border_calls(&self) -> u64 {
        self.explicit_sizes().iter().map(|&s| binomial_u64(self.n, s)).sum()
    }

    /// Number of implicit strata of order `k`, i.e. the warm-up cost.
    pub fn implicit_strata(&self, k: usize) -> u64 {
        implicit_strata_count(self.n, k, &self.explicit)
    }

    /// A plan with a chosen `s_exp`, bypassing the growth rule.
    pub fn with_s_exp(n: usize, budget: u64, s_exp: usize, p: &SizeDistribution) -> Result<Self> {
        if s_exp == 0 || 2 * s_exp > n + 1 {
            return Err(Error::InvalidParameter("s_exp must lie in 1..=(n+1)/2"));
        }
        let explicit = explicit_mask(n, s_exp);
        let plan = BorderPlan {
            n,
            budget,
            s_exp,
            leftover: 0,
            distribution: renormalize(p, &explicit),
            explicit,
        };
        let calls = plan.border_calls();
        if calls > budget {
            return Err(Error::InsufficientBudget { needed: calls, available: budget });
        }
        Ok(BorderPlan { leftover: budget - calls, ..plan })
    }
}

fn explicit_mask(n: usize, s_exp: usize) -> Vec<bool> {
    (0..=n).map(|s| s <= s_exp || s + s_exp >= n).collect()
}

fn implicit_strata_count(n: usize, k: usize, explicit: &[bool]) -> u64 {
    let per_key: u64 = (0..=k)
        .map(|w| {
            let sizes = (0..=n - k).filter(|&l| !explicit[l + w]).count() as u64;
            binomial_u64(k, w) * sizes
        })
        .sum();
    binomial_u64(n, k) * per_key
}

/// `P` renormalized onto the implicit sizes; uniform when nothing is left.
fn renormalize(p: &SizeDistribution, explicit: &[bool]) -> SizeDistribution {
    let n = explicit.len() - 1;
    let mass: f64 = (0..=n).filter(|&s| !explicit[s]).map(|s| p.prob(s)).sum();
    let probs = if mass > 0.0 {
        (0..=n)
            .map(|s| if explicit[s] { 0.0 } else { p.prob(s) / mass })
            .collect()
    } else {
        vec![1.0 / (n + 1) as f64; n + 1]
    };
    SizeDistribution::from_probs(probs).expect("renormalized distribution")
}

/// Chooses `s_exp` for budget `budget`.
///
/// Starts at `s_exp = 1` (the `2n+2` coalitions of sizes `0, 1, n-1, n`)
/// and adds the next size pair while its coalition count is covered by the
/// expected number of draws of that size, `C(n, s+1) <= P̄(s+1) · B̄`.
///
/// With `warmup_orders` set, the budget in that test is the leftover after
/// reserving one warm-up sample per implicit stratum of every listed order,
/// and while that reserve exceeds the leftover the next pair is enumerated
/// whenever it fits.
pub fn plan_borders(
    n: usize,
    budget: u64,
    p: &SizeDistribution,
    warmup_orders: Option<&[usize]>,
) -> Result<BorderPlan> {
    if n < 2 || p.players() != n {
        return Err(Error::InvalidParameter("distribution does not match player count"));
    }
    if !p.is_symmetric() {
        return Err(Error::AsymmetricDistribution);
    }
    let mandatory = 2 * n as u64 + 2;
    if budget < mandatory {
        return Err(Error::InsufficientBudget { needed: mandatory, available: budget });
    }
    let mut s_exp = 1;
    let mut leftover = budget - mandatory;
    loop {
        let next = s_exp + 1;
        if 2 * next > n {
            break;
        }
        let explicit = explicit_mask(n, s_exp);
        let mass: f64 = (0..=n).filter(|&s| !explicit[s]).map(|s| p.prob(s)).sum();
        if mass <= 0.0 {
            break;
        }
        let cost = if 2 * next == n {
            binomial_u64(n, next)
        } else {
            2 * binomial_u64(n, next)
        };
        let (available, warmup_blocked) = match warmup_orders {
            Some(orders) => {
                let reserve: u64 = orders.iter().map(|&k| implicit_strata_count(n, k, &explicit)).sum();
                (leftover.saturating_sub(reserve), reserve > leftover)
            }
            None => (leftover, false),
        };
        let expected = p.prob(next) / mass * available as f64;
        let grow = if warmup_blocked {
            cost <= leftover
        } else {
            binomial(n, next) <= expected * (1.0 + GROWTH_TOLERANCE)
        };
        if !grow {
            break;
        }
        s_exp = next;
        leftover -= cost;
    }
    let explicit = explicit_mask(n, s_exp);
    Ok(BorderPlan {
        n,
        budget,
        s_exp,
        leftover,
        distribution: renormalize(p, &explicit),
        explicit,
    })
}

/// Enumerates every coalition of every explicit size once and writes the
/// exact stratum averages into each table.
pub fn evaluate_borders<G: Game + ?Sized>(
    plan: &BorderPlan,
    oracle: &mut BudgetedOracle<'_, G>,
    tables: &mut [StrataTable],
) -> Result<u64> {
    let n = plan.n;
    let inv: Vec<Vec<f64>> = tables.iter().map(|t| inverse_binomials(n, t.order())).collect();
    for t in tables.iter_mut() {
        t.set_explicit_sizes(&plan.explicit);
    }
    let mut calls = 0;
    for size in plan.explicit_sizes() {
        for a in k_subsets(n, size) {
            let v = oracle.evaluate(a)?;
            calls += 1;
            for (t, inv) in tables.iter_mut().zip(&inv) {
                t.add_explicit(a, v, inv);
            }
        }
    }
    Ok(calls)
}

/// Plans the borders for the oracle's remaining budget and evaluates them.
pub fn compute_borders<G: Game + ?Sized>(
    oracle: &mut BudgetedOracle<'_, G>,
    p: &SizeDistribution,
    tables: &mut [StrataTable],
    warmup_orders: Option<&[usize]>,
) -> Result<BorderPlan> {
    let plan = plan_borders(oracle.players(), oracle.remaining(), p, warmup_orders)?;
    evaluate_borders(&plan, oracle, tables)?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::SoumGame;

    #[test]
    fn hand_trace_n6_b50() {
        let p = SizeDistribution::pairs(6).unwrap();
        let plan = plan_borders(6, 50, &p, None).unwrap();
        assert_eq!(plan.s_exp(), 2);
        assert_eq!(plan.explicit_sizes(), [0, 1, 2, 4, 5, 6]);
        assert_eq!(plan.implicit_sizes(), [3]);
        assert_eq!(plan.leftover(), 6);
        assert!((plan.distribution().prob(3) - 1.0).abs() < 1e-15);
        assert_eq!(plan.border_calls(), 44);
    }

    #[test]
    fn full_budget_makes_everything_explicit() {
        for n in 4..=14 {
            for p in [SizeDistribution::pairs(n).unwrap(), SizeDistribution::uniform(n).unwrap()] {
                let plan = plan_borders(n, 1 << n, &p, None).unwrap();
                assert!(plan.implicit_sizes().is_empty(), "n={n} s_exp={}", plan.s_exp());
                assert_eq!(plan.leftover(), 0);
                // with a warm-up reserve the plan either leaves room for it
                // or enumerates everything
                for orders in [&[2usize][..], &[1, 2, 3][..]] {
                    let plan = plan_borders(n, 1 << n, &p, Some(orders)).unwrap();
                    let reserve: u64 = orders.iter().map(|&k| plan.implicit_strata(k)).sum();
                    assert!(reserve <= plan.leftover(), "n={n} s_exp={}", plan.s_exp());
                }
            }
        }
    }

    #[test]
    fn rejects_small_budget_and_asymmetry() {
        let p = SizeDistribution::pairs(6).unwrap();
        assert!(matches!(plan_borders(6, 13, &p, None), Err(Error::InsufficientBudget { .. })));
        let skew = SizeDistribution::from_probs(alloc::vec![0.0, 0.0, 0.5, 0.3, 0.2, 0.0, 0.0]).unwrap();
        assert_eq!(plan_borders(6, 40, &skew, None), Err(Error::AsymmetricDistribution));
    }

    #[test]
    fn partition_invariants() {
        for n in 4..=12 {
            let p = SizeDistribution::uniform(n).unwrap();
            for budget in [2 * n as u64 + 2, 100, 500, 2000] {
                let plan = plan_borders(n, budget, &p, None).unwrap();
                let s = plan.s_exp();
                assert!(s >= 1);
                for size in 0..=n {
                    assert_eq!(plan.is_explicit(size), size <= s || size >= n - s);
                }
                assert_eq!(plan.leftover(), budget - plan.border_calls());
                let mass: f64 = plan.distribution().probs().iter().sum();
                assert!((mass - 1.0).abs() < 1e-12);
            }
        }
    }

    /// |I_imp| = C(n,k) Σ_w C(k,w) (n - max{k, s+1+w} - max{0, s+1-w} + 1),
    /// each term clamped at zero once the implicit range is empty.
    fn closed_form_count(n: usize, k: usize, s: usize) -> u64 {
        let per: i64 = (0..=k)
            .map(|w| {
                let len = n as i64 - (k.max(s + 1 + w)) as i64 - (s + 1).saturating_sub(w) as i64 + 1;
                binomial_u64(k, w) as i64 * len.max(0)
            })
            .sum();
        binomial_u64(n, k) * per as u64
    }

    #[test]
    fn implicit_count_matches_closed_form() {
        for n in 4..=14 {
            for k in 1..=n.min(5) {
                for s in 1..=(n + 1) / 2 {
                    let mask = explicit_mask(n, s);
                    assert_eq!(implicit_strata_count(n, k, &mask), closed_form_count(n, k, s), "n={n} k={k} s={s}");
                }
            }
        }
        // n=6, k=2, s_exp=2: one eligible ℓ per (K, W)
        assert_eq!(implicit_strata_count(6, 2, &explicit_mask(6, 2)), 60);
    }

    #[test]
    fn border_evaluation_counts_and_exactness() {
        let g = SoumGame::generate(6, 30, 2).unwrap();
        let mut oracle = BudgetedOracle::new(&g, 50);
        let mut tables = alloc::vec![StrataTable::new(6, 2).unwrap()];
        let p = SizeDistribution::pairs(6).unwrap();
        let plan = compute_borders(&mut oracle, &p, &mut tables, None).unwrap();
        assert_eq!(oracle.calls_used(), plan.border_calls());
        assert_eq!(oracle.calls_used(), 44);

        let t = &tables[0];
        for &key in t.keys() {
            for w in key.subsets() {
                for l in 0..=4 {
                    if !plan.is_explicit(l + w.len()) {
                        continue;
                    }
                    let members: alloc::vec::Vec<f64> = key
                        .complement(6)
                        .subsets()
                        .filter(|s| s.len() == l)
                        .map(|s| g.value(s.union(w)))
                        .collect();
                    let avg = members.iter().sum::<f64>() / members.len() as f64;
                    assert!((t.estimate(key, w, l).unwrap() - avg).abs() < 1e-12);
                    assert_eq!(t.count(key, w, l).unwrap(), members.len() as u64);
                }
            }
        }
    }
}

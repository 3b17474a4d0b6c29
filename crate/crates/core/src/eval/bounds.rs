use alloc::vec;
use alloc::vec::Vec;

use crate::coalition::{k_subsets, Coalition};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::index::{check_order, WeightProfile};
use crate::svarmiq::BorderPlan;

/// Largest player count for which strata are enumerated.
pub const STATS_MAX_PLAYERS: usize = 16;

/// `γ_2 = 2(n-1)²` and `γ_k = n^{k-1} (n-k+1)²` for `k >= 3`.
pub fn gamma_factor(n: usize, k: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::InvalidParameter("the bounds need n >= 4"));
    }
    if k < 2 || k > n {
        return Err(Error::InvalidOrder { n, k });
    }
    let nf = n as f64;
    Ok(if k == 2 {
        2.0 * (nf - 1.0) * (nf - 1.0)
    } else {
        let m = (n - k + 1) as f64;
        libm::pow(nf, (k - 1) as f64) * m * m
    })
}

/// Population variance and range of every implicit stratum of one order.
///
/// Explicit strata are exact after the border phase and are stored as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StrataStats {
    n: usize,
    k: usize,
    keys: Vec<Coalition>,
    explicit: Vec<bool>,
    variances: Vec<f64>,
    ranges: Vec<f64>,
    range_sums: Vec<f64>,
}

impl StrataStats {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn keys(&self) -> &[Coalition] {
        &self.keys
    }

    #[inline]
    fn slot(&self, rank: usize, w: usize, l: usize) -> usize {
        ((rank << self.k) | w) * (self.n - self.k + 1) + l
    }

    fn rank(&self, key: Coalition) -> Result<usize> {
        self.keys.binary_search(&key).map_err(|_| Error::KeyMismatch)
    }

    /// Position of `w` among the subsets of `key`: bit `j` is set when the
    /// `j`-th smallest member of `key` is in `w`.
    fn local(key: Coalition, w: Coalition) -> usize {
        key.players()
            .enumerate()
            .fold(0, |acc, (j, p)| acc | (w.contains(p) as usize) << j)
    }

    fn check_stratum(&self, key: Coalition, w: Coalition, l: usize) -> Result<usize> {
        let rank = self.rank(key)?;
        if !w.is_subset_of(key) || l > self.n - self.k {
            return Err(Error::KeyMismatch);
        }
        Ok(self.slot(rank, Self::local(key, w), l))
    }

    pub fn variance(&self, key: Coalition, w: Coalition, l: usize) -> Result<f64> {
        self.check_stratum(key, w, l).map(|i| self.variances[i])
    }

    pub fn range(&self, key: Coalition, w: Coalition, l: usize) -> Result<f64> {
        self.check_stratum(key, w, l).map(|i| self.ranges[i])
    }

    /// `R_K`, the summed range of the implicit strata of `key`.
    pub fn range_sum(&self, key: Coalition) -> Result<f64> {
        self.rank(key).map(|r| self.range_sums[r])
    }

    /// Implicit strata of `key` as `(W, ℓ, variance, range)`.
    pub fn strata(&self, key: Coalition) -> Result<impl Iterator<Item = (Coalition, usize, f64, f64)> + '_> {
        let rank = self.rank(key)?;
        let width = self.n - self.k + 1;
        Ok(key.subsets().flat_map(move |w| {
            let local = Self::local(key, w);
            (0..width)
                .filter(move |&l| !self.explicit[l + w.len()])
                .map(move |l| {
                    let i = self.slot(rank, local, l);
                    (w, l, self.variances[i], self.ranges[i])
                })
        }))
    }
}

#[derive(Debug, Clone, Copy)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Welford {
    const EMPTY: Welford = Welford { count: 0, mean: 0.0, m2: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY };

    fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }

    fn range(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.max - self.min
        }
    }
}

/// Enumerates every implicit stratum of order `k` under `plan`.
pub fn strata_statistics<G: Game + ?Sized>(game: &G, k: usize, plan: &BorderPlan) -> Result<StrataStats> {
    let n = game.players();
    check_order(n, k)?;
    if n > STATS_MAX_PLAYERS {
        return Err(Error::PlayerCount { n, max: STATS_MAX_PLAYERS });
    }
    if plan.n() != n {
        return Err(Error::InvalidParameter("border plan is for a different player count"));
    }
    let values: Vec<f64> = (0..1u64 << n)
        .map(|b| game.value(Coalition::from_bits_unchecked(b)))
        .collect();
    let explicit = plan.explicit_mask().to_vec();
    let keys: Vec<Coalition> = k_subsets(n, k).collect();
    let width = n - k + 1;
    let len = (keys.len() << k) * width;
    let mut stats = StrataStats {
        n,
        k,
        explicit,
        variances: vec![0.0; len],
        ranges: vec![0.0; len],
        range_sums: vec![0.0; keys.len()],
        keys,
    };
    let mut acc = vec![Welford::EMPTY; width];
    for rank in 0..stats.keys.len() {
        let key = stats.keys[rank];
        let rest = key.complement(n);
        let mut r_k = 0.0;
        for w in key.subsets() {
            acc.fill(Welford::EMPTY);
            for s in rest.subsets() {
                let l = s.len();
                if !stats.explicit[l + w.len()] {
                    acc[l].push(values[s.union(w).bits() as usize]);
                }
            }
            let local = StrataStats::local(key, w);
            for (l, a) in acc.iter().enumerate() {
                if stats.explicit[l + w.len()] {
                    continue;
                }
                let i = stats.slot(rank, local, l);
                stats.variances[i] = a.variance();
                stats.ranges[i] = a.range();
                r_k += a.range();
            }
        }
        stats.range_sums[rank] = r_k;
    }
    Ok(stats)
}

fn check_profile(stats: &StrataStats, weights: &WeightProfile) -> Result<()> {
    if stats.n != weights.n() || stats.k != weights.order() {
        return Err(Error::KeyMismatch);
    }
    Ok(())
}

fn check_b(b_tilde: u64) -> Result<f64> {
    if b_tilde == 0 {
        return Err(Error::NonPositiveLeftover(0));
    }
    Ok(b_tilde as f64)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive"));
    }
    Ok(())
}

/// `(γ_k / B̃) Σ_W Σ_ℓ C(n-k,ℓ)² λ_{k,ℓ}² σ²_{K,ℓ,W}` over implicit strata.
pub fn variance_bound(
    stats: &StrataStats,
    weights: &WeightProfile,
    b_tilde: u64,
    gamma: f64,
    key: Coalition,
) -> Result<f64> {
    check_profile(stats, weights)?;
    let b = check_b(b_tilde)?;
    let c = weights.stratum_weights();
    let total: f64 = stats.strata(key)?.map(|(_, l, var, _)| c[l] * c[l] * var).sum();
    Ok(gamma / b * total)
}

/// A probability bound as computed and clipped to at most 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBound {
    pub raw: f64,
    pub clipped: f64,
}

impl ProbabilityBound {
    fn new(raw: f64) -> Self {
        ProbabilityBound { raw, clipped: raw.min(1.0) }
    }

    pub fn is_clipped(&self) -> bool {
        self.raw > 1.0
    }
}

/// `P(|Î_K - I_K| > ε) <= variance_bound / ε²`.
pub fn chebyshev_bound(
    stats: &StrataStats,
    weights: &WeightProfile,
    b_tilde: u64,
    gamma: f64,
    key: Coalition,
    eps: f64,
) -> Result<ProbabilityBound> {
    check_eps(eps)?;
    let v = variance_bound(stats, weights, b_tilde, gamma, key)?;
    Ok(ProbabilityBound::new(v / (eps * eps)))
}

/// Hoeffding-type tail bound
/// `Σ_W Σ_ℓ [exp(-B̃/(2γ²)) + 2 q^m / (1/q - 1)]`, `m = ⌊B̃/(2γ)⌋`,
/// `q = exp(-2ε² / (C(n-k,ℓ)² λ² R_K²))`; 0 when `R_K = 0`.
pub fn hoeffding_bound(
    stats: &StrataStats,
    weights: &WeightProfile,
    b_tilde: u64,
    gamma: f64,
    key: Coalition,
    eps: f64,
) -> Result<ProbabilityBound> {
    check_profile(stats, weights)?;
    check_eps(eps)?;
    let b = check_b(b_tilde)?;
    let r_k = stats.range_sum(key)?;
    if r_k == 0.0 {
        return Ok(ProbabilityBound::new(0.0));
    }
    let c = weights.stratum_weights();
    let base = libm::exp(-b / (2.0 * gamma * gamma));
    let m = libm::floor(b / (2.0 * gamma));
    let total: f64 = stats
        .strata(key)?
        .map(|(_, l, _, _)| {
            let scale = c[l] * r_k;
            if scale == 0.0 {
                return base;
            }
            let ln_q = -2.0 * eps * eps / (scale * scale);
            // 2 q^m / (1/q - 1) = 2 q^{m+1} / (1 - q)
            base + 2.0 * libm::exp((m + 1.0) * ln_q) / -libm::expm1(ln_q)
        })
        .sum();
    Ok(ProbabilityBound::new(total))
}

/// `B̃ = B - Σ_{s ∈ S_exp} C(n,s) - warm-up cost`, which must be positive.
pub fn leftover_budget(budget: u64, plan: &BorderPlan, warmup_cost: u64) -> Result<u64> {
    let left = budget as i128 - plan.border_calls() as i128 - warmup_cost as i128;
    if left <= 0 {
        return Err(Error::NonPositiveLeftover(left.max(i64::MIN as i128) as i64));
    }
    Ok(left as u64)
}

//! Weight profiles, exact interaction values and n-SII aggregation.
//!
//! Every index here is a cardinal interaction index
//!
//! ```text
//! I_K = sum_{S ⊆ N \ K} λ_{k,|S|} Δ_K(S),   Δ_K(S) = sum_{W ⊆ K} (-1)^{k-|W|} v(S ∪ W)
//! ```
//!
//! and differs from the others only by its weights `λ_{k,ℓ}`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::coalition::{check_players, colex_rank, k_subsets, Coalition};
use crate::combinatorics::{bernoulli_f64, binomial, binomial_u64, ln_factorials};
use crate::error::{Error, Result};
use crate::game::{Game, SoumGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexKind {
    /// Shapley interaction index.
    Sii,
    /// Shapley-Taylor interaction index.
    Sti,
    /// Faithful Shapley interaction index.
    Fsi,
    /// Banzhaf interaction index.
    Bii,
    /// Shapley value; order 1 only.
    Sv,
}

impl IndexKind {
    pub const ALL: [IndexKind; 5] = [IndexKind::Sii, IndexKind::Sti, IndexKind::Fsi, IndexKind::Bii, IndexKind::Sv];

    pub fn as_str(self) -> &'static str {
        match self {
            IndexKind::Sii => "sii",
            IndexKind::Sti => "sti",
            IndexKind::Fsi => "fsi",
            IndexKind::Bii => "bii",
            IndexKind::Sv => "sv",
        }
    }

    pub fn supports_order(self, k: usize) -> bool {
        k >= 1 && (self != IndexKind::Sv || k == 1)
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sii" => Ok(IndexKind::Sii),
            "sti" => Ok(IndexKind::Sti),
            "fsi" => Ok(IndexKind::Fsi),
            "bii" => Ok(IndexKind::Bii),
            "sv" => Ok(IndexKind::Sv),
            _ => Err(Error::InvalidParameter("unknown index kind")),
        }
    }
}

/// Weights `λ_{k,ℓ}` for `ℓ = 0..=n-k` of one index, order and player count.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    n: usize,
    k: usize,
    kind: IndexKind,
    weights: Vec<f64>,
}

impl WeightProfile {
    pub fn new(kind: IndexKind, n: usize, k: usize) -> Result<Self> {
        cii_weights(kind, n, k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn lambda(&self, size: usize) -> f64 {
        self.weights[size]
    }

    /// `C(n-k, ℓ) λ_{k,ℓ}`: the weight a stratum of size `ℓ` receives.
    pub fn stratum_weights(&self) -> Vec<f64> {
        let m = self.n - self.k;
        self.weights.iter().enumerate().map(|(l, w)| binomial(m, l) * w).collect()
    }
}

pub(crate) fn check_order(n: usize, k: usize) -> Result<()> {
    check_players(n)?;
    if k == 0 || k > n {
        return Err(Error::InvalidOrder { n, k });
    }
    Ok(())
}

pub fn cii_weights(kind: IndexKind, n: usize, k: usize) -> Result<WeightProfile> {
    check_order(n, k)?;
    if kind == IndexKind::Sv && k != 1 {
        return Err(Error::ShapleyOrder(k));
    }
    let m = n - k;
    let weights = match kind {
        IndexKind::Sii | IndexKind::Sv => (0..=m)
            .map(|l| 1.0 / ((m + 1) as f64 * binomial(m, l)))
            .collect(),
        IndexKind::Sti => (0..=m).map(|l| k as f64 / (n as f64 * binomial(n - 1, l))).collect(),
        IndexKind::Fsi => {
            let lf = ln_factorials(n + k);
            let head = lf[2 * k - 1] - 2.0 * lf[k - 1];
            (0..=m)
                .map(|l| libm::exp(head + lf[n - l - 1] + lf[l + k - 1] - lf[n + k - 1]))
                .collect()
        }
        IndexKind::Bii => vec![libm::ldexp(1.0, -(m as i32)); m + 1],
    };
    Ok(WeightProfile { n, k, kind, weights })
}

/// Scores for every interaction set of one order, keyed by coalition.
///
/// Scores are stored in colexicographic order of the keys, which coincides
/// with ascending bit value.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateMap {
    n: usize,
    k: usize,
    kind: IndexKind,
    scores: Vec<f64>,
}

impl EstimateMap {
    pub fn zeros(n: usize, k: usize, kind: IndexKind) -> Result<Self> {
        check_order(n, k)?;
        let len = binomial_u64(n, k) as usize;
        Ok(EstimateMap { n, k, kind, scores: vec![0.0; len] })
    }

    /// Builds a map from scores listed in ascending key order.
    pub fn from_scores(n: usize, k: usize, kind: IndexKind, scores: Vec<f64>) -> Result<Self> {
        check_order(n, k)?;
        if scores.len() as u64 != binomial_u64(n, k) {
            return Err(Error::KeyMismatch);
        }
        Ok(EstimateMap { n, k, kind, scores })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn scores_mut(&mut self) -> &mut [f64] {
        &mut self.scores
    }

    pub fn get(&self, key: Coalition) -> Option<f64> {
        if key.len() != self.k || !key.is_subset_of(Coalition::full(self.n)) {
            return None;
        }
        self.scores.get(colex_rank(key)).copied()
    }

    pub fn keys(&self) -> impl Iterator<Item = Coalition> {
        k_subsets(self.n, self.k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coalition, f64)> + '_ {
        self.keys().zip(self.scores.iter().copied())
    }

    pub fn max_abs_diff(&self, other: &EstimateMap) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .scores
            .iter()
            .zip(&other.scores)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_compatible(&self, other: &EstimateMap) -> Result<()> {
        if self.n != other.n || self.k != other.k || self.scores.len() != other.scores.len() {
            return Err(Error::KeyMismatch);
        }
        Ok(())
    }
}

/// `Δ_K(S)`; evaluates the game `2^|K|` times.
pub fn discrete_derivative<G: Game + ?Sized>(game: &G, k_set: Coalition, s: Coalition) -> Result<f64> {
    if !k_set.is_disjoint(s) {
        return Err(Error::Overlap);
    }
    let k = k_set.len();
    Ok(k_set
        .subsets()
        .map(|w| {
            let v = game.value(s.union(w));
            if (k - w.len()) % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .sum())
}

/// Largest player count accepted by the brute-force ground truth.
pub const EXACT_MAX_PLAYERS: usize = 20;

pub fn exact_cii<G: Game + ?Sized>(game: &G, kind: IndexKind, k: usize) -> Result<EstimateMap> {
    Ok(exact_cii_many(game, &[(kind, k)])?.pop().unwrap())
}

/// Ground truth for several (kind, order) pairs from one pass over all `2^n`
/// coalitions.
///
/// Each coalition value is routed, for every `K`, to the stratum
/// `(W = A ∩ K, ℓ = |A| - |W|)` and weighted by `λ_{k,ℓ} (-1)^{k-|W|}`; this
/// is the defining double sum reordered by coalition.
pub fn exact_cii_many<G: Game + ?Sized>(game: &G, requests: &[(IndexKind, usize)]) -> Result<Vec<EstimateMap>> {
    let n = game.players();
    if n > EXACT_MAX_PLAYERS {
        return Err(Error::PlayerCount { n, max: EXACT_MAX_PLAYERS });
    }
    let profiles = requests
        .iter()
        .map(|&(kind, k)| cii_weights(kind, n, k))
        .collect::<Result<Vec<_>>>()?;
    let keys: Vec<Vec<Coalition>> = profiles.iter().map(|p| k_subsets(n, p.k).collect()).collect();
    let mut out = profiles
        .iter()
        .map(|p| EstimateMap::zeros(n, p.k, p.kind))
        .collect::<Result<Vec<_>>>()?;

    for bits in 0..1u64 << n {
        let a = Coalition::from_bits_unchecked(bits);
        let v = game.value(a);
        let size = a.len();
        for ((profile, ks), map) in profiles.iter().zip(&keys).zip(out.iter_mut()) {
            let k = profile.k;
            for (slot, &key) in map.scores.iter_mut().zip(ks) {
                let w = a.intersection(key).len();
                let term = profile.weights[size - w] * v;
                if (k - w) % 2 == 0 {
                    *slot += term;
                } else {
                    *slot -= term;
                }
            }
        }
    }
    Ok(out)
}

/// Interaction values of a sum of unanimity games in closed form.
///
/// For `u_T` with `t = |T|`, `I_K(u_T) = 0` unless `K ⊆ T`, in which case
/// `I_K(u_T) = sum_{ℓ=t-k}^{n-k} C(n-t, ℓ-t+k) λ_{k,ℓ}`.
pub fn soum_exact_cii(game: &SoumGame, kind: IndexKind, k: usize) -> Result<EstimateMap> {
    let n = game.players();
    let profile = cii_weights(kind, n, k)?;
    let unanimity: Vec<f64> = (0..=n)
        .map(|t| {
            if t < k {
                return 0.0;
            }
            (t - k..=n - k)
                .map(|l| binomial(n - t, l + k - t) * profile.weights[l])
                .sum()
        })
        .collect();
    let mut map = EstimateMap::zeros(n, k, kind)?;
    for (slot, key) in map.scores.iter_mut().zip(k_subsets(n, k)) {
        *slot = game
            .terms()
            .iter()
            .filter(|(t, _)| key.is_subset_of(*t))
            .map(|&(t, c)| c * unanimity[t.len()])
            .sum();
    }
    Ok(map)
}

/// n-SII values for all interaction sets of size `1..=k_max`.
///
/// `sii` must hold Shapley interaction maps for orders `1..=k_max` (the
/// order-1 map may be tagged as SV), in any order. The recursion
///
/// ```text
/// Φ^m_K = SII_K                                              if |K| = m
/// Φ^m_K = Φ^{m-1}_K + B_{m-|K|} sum_{K' ⊃ K, |K'| = m} SII_K'  if |K| < m
/// ```
///
/// starts from `Φ^1 = SV` and is applied as written to whatever maps are
/// supplied, exact or estimated.
pub fn nsii_aggregate(sii: &[EstimateMap], k_max: usize) -> Result<BTreeMap<Coalition, f64>> {
    if k_max == 0 {
        return Err(Error::MissingOrder(0));
    }
    let by_order = |m: usize| -> Result<&EstimateMap> {
        sii.iter()
            .find(|e| e.k == m && matches!(e.kind, IndexKind::Sii | IndexKind::Sv))
            .ok_or(Error::MissingOrder(m))
    };
    let first = by_order(1)?;
    let n = first.n;
    if k_max > n {
        return Err(Error::InvalidOrder { n, k: k_max });
    }
    let bernoulli = bernoulli_f64(k_max)?;

    let mut phi: BTreeMap<Coalition, f64> = first.iter().collect();
    for m in 2..=k_max {
        let top = by_order(m)?;
        if top.n != n {
            return Err(Error::KeyMismatch);
        }
        for (key, value) in top.iter() {
            phi.insert(key, value);
            for sub in key.subsets() {
                if sub.is_empty() || sub == key {
                    continue;
                }
                *phi.get_mut(&sub).expect("lower orders present") += bernoulli[m - sub.len()] * value;
            }
        }
    }
    Ok(phi)
}

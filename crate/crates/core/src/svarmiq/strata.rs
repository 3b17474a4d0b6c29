use alloc::vec;
use alloc::vec::Vec;

use crate::coalition::{k_subsets, Coalition};
use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::index::{check_order, EstimateMap, IndexKind, WeightProfile};

/// The stratum of `K` a coalition `A` falls into: `(A ∩ K, |A| - |A ∩ K|)`.
#[inline]
pub fn stratum_assign(a: Coalition, key: Coalition) -> (Coalition, usize) {
    let w = a.intersection(key);
    (w, a.len() - w.len())
}

/// Running mean after one more observation.
#[inline]
pub fn update_mean(old_mean: f64, count: u64, value: f64) -> f64 {
    (old_mean * count as f64 + value) / (count as f64 + 1.0)
}

/// Stratum means and sample counters for every `(K, W ⊆ K, ℓ)` of one order.
///
/// Dense layout: `(rank(K) * 2^k + local(W)) * (n-k+1) + ℓ`, where
/// `local(W)` sets bit `j` when the `j`-th smallest member of `K` is in `W`.
#[derive(Debug, Clone)]
pub struct StrataTable {
    n: usize,
    k: usize,
    keys: Vec<Coalition>,
    members: Vec<u8>,
    estimates: Vec<f64>,
    counts: Vec<u64>,
    explicit_sizes: Vec<bool>,
}

impl StrataTable {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_order(n, k)?;
        if k > 16 {
            return Err(Error::Unsupported("strata tables support orders up to 16"));
        }
        let keys: Vec<Coalition> = k_subsets(n, k).collect();
        let members = keys.iter().flat_map(|key| key.players().map(|p| p as u8)).collect();
        let len = keys.len() << k;
        let len = len
            .checked_mul(n - k + 1)
            .ok_or(Error::Unsupported("strata table too large"))?;
        Ok(StrataTable {
            n,
            k,
            keys,
            members,
            estimates: vec![0.0; len],
            counts: vec![0; len],
            explicit_sizes: vec![false; n + 1],
        })
    }

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
    fn width(&self) -> usize {
        self.n - self.k + 1
    }

    #[inline]
    fn local_w(&self, rank: usize, a: Coalition) -> usize {
        let bits = a.bits();
        self.members[rank * self.k..(rank + 1) * self.k]
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &p)| acc | ((bits >> p & 1) as usize) << j)
    }

    /// Translates a local subset index back into players.
    pub fn w_from_local(&self, rank: usize, local: usize) -> Coalition {
        let members = &self.members[rank * self.k..(rank + 1) * self.k];
        let bits = members
            .iter()
            .enumerate()
            .filter(|(j, _)| local >> j & 1 == 1)
            .fold(0u64, |acc, (_, &p)| acc | 1 << p);
        Coalition::from_bits_unchecked(bits)
    }

    #[inline]
    fn slot(&self, rank: usize, local: usize, size: usize) -> usize {
        ((rank << self.k) | local) * self.width() + size
    }

    fn slot_of(&self, key: Coalition, w: Coalition, size: usize) -> Option<usize> {
        if key.len() != self.k || !w.is_subset_of(key) || size > self.n - self.k {
            return None;
        }
        let rank = self.keys.binary_search(&key).ok()?;
        Some(self.slot(rank, self.local_w(rank, w), size))
    }

    pub fn estimate(&self, key: Coalition, w: Coalition, size: usize) -> Option<f64> {
        self.slot_of(key, w, size).map(|i| self.estimates[i])
    }

    pub fn count(&self, key: Coalition, w: Coalition, size: usize) -> Option<u64> {
        self.slot_of(key, w, size).map(|i| self.counts[i])
    }

    pub fn is_explicit(&self, w: Coalition, size: usize) -> bool {
        self.explicit_sizes[w.len() + size]
    }

    pub(crate) fn set_explicit_sizes(&mut self, explicit: &[bool]) {
        self.explicit_sizes.copy_from_slice(explicit);
    }

    /// Adds `v / C(n-k, ℓ)` to the stratum of every key; used while every
    /// coalition of an explicit size is enumerated.
    pub(crate) fn add_explicit(&mut self, a: Coalition, v: f64, inv_binom: &[f64]) {
        let size = a.len();
        for rank in 0..self.keys.len() {
            let local = self.local_w(rank, a);
            let l = size - local.count_ones() as usize;
            let i = self.slot(rank, local, l);
            self.estimates[i] += v * inv_binom[l];
            self.counts[i] += 1;
        }
    }

    /// Folds one sampled value into exactly one stratum of every key.
    pub(crate) fn update(&mut self, a: Coalition, v: f64) {
        let size = a.len();
        for rank in 0..self.keys.len() {
            let local = self.local_w(rank, a);
            let l = size - local.count_ones() as usize;
            let i = self.slot(rank, local, l);
            self.estimates[i] = update_mean(self.estimates[i], self.counts[i], v);
            self.counts[i] += 1;
        }
    }

    pub(crate) fn seed_stratum(&mut self, rank: usize, local: usize, size: usize, v: f64) {
        let i = self.slot(rank, local, size);
        self.estimates[i] = v;
        self.counts[i] = 1;
    }

    /// Implicit strata as `(rank, local W, ℓ)` in ascending order.
    pub fn implicit_strata(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let width = self.width();
        (0..self.keys.len()).flat_map(move |rank| {
            (0..1usize << self.k).flat_map(move |local| {
                let w = local.count_ones() as usize;
                (0..width)
                    .filter(move |&l| !self.explicit_sizes[l + w])
                    .map(move |l| (rank, local, l))
            })
        })
    }

    pub fn count_at(&self, rank: usize, local: usize, size: usize) -> u64 {
        self.counts[self.slot(rank, local, size)]
    }

    pub fn estimate_at(&self, rank: usize, local: usize, size: usize) -> f64 {
        self.estimates[self.slot(rank, local, size)]
    }

    pub fn empty_strata(&self) -> usize {
        self.implicit_strata()
            .filter(|&(r, w, l)| self.count_at(r, w, l) == 0)
            .count()
    }

    /// `Î_K = Σ_ℓ C(n-k,ℓ) λ_{k,ℓ} Σ_{W ⊆ K} (-1)^{k-|W|} Î_{K,ℓ}^W`.
    pub fn aggregate(&self, profile: &WeightProfile) -> Result<EstimateMap> {
        if profile.n() != self.n || profile.order() != self.k {
            return Err(Error::KeyMismatch);
        }
        let weights = stratum_weights(profile);
        let width = self.width();
        let scores = (0..self.keys.len())
            .map(|rank| {
                let mut total = 0.0;
                for (l, &weight) in weights.iter().enumerate().take(width) {
                    let mut inner = 0.0;
                    for local in 0..1usize << self.k {
                        let v = self.estimates[self.slot(rank, local, l)];
                        if (self.k - local.count_ones() as usize) % 2 == 0 {
                            inner += v;
                        } else {
                            inner -= v;
                        }
                    }
                    total += weight * inner;
                }
                total
            })
            .collect();
        EstimateMap::from_scores(self.n, self.k, profile.kind(), scores)
    }

    /// Pairwise Shapley interactions via the four-case formula
    /// `Σ_ℓ (1/(n-1)) (Î^∅ - Î^{i} - Î^{j} + Î^{ij})`.
    ///
    /// Cross-check for [`aggregate`](Self::aggregate) with SII weights; the
    /// two agree bit for bit.
    pub fn aggregate_pairs_check(&self) -> Result<EstimateMap> {
        if self.k != 2 {
            return Err(Error::InvalidOrder { n: self.n, k: self.k });
        }
        let c = 1.0 / (self.n - 1) as f64;
        let scores = (0..self.keys.len())
            .map(|rank| {
                let e = |local: usize, l: usize| self.estimates[self.slot(rank, local, l)];
                let mut total = 0.0;
                for l in 0..=self.n - 2 {
                    // local 1 = {i}, 2 = {j}, 3 = {i, j}
                    total += c * (e(0, l) - e(1, l) - e(2, l) + e(3, l));
                }
                total
            })
            .collect();
        EstimateMap::from_scores(self.n, 2, IndexKind::Sii, scores)
    }

    #[cfg(test)]
    pub(crate) fn estimates_mut(&mut self) -> &mut [f64] {
        &mut self.estimates
    }
}

/// `C(n-k, ℓ) λ_{k,ℓ}`, with the Shapley case reduced to `1/(n-k+1)`.
fn stratum_weights(profile: &WeightProfile) -> Vec<f64> {
    let m = profile.n() - profile.order();
    match profile.kind() {
        IndexKind::Sii | IndexKind::Sv => vec![1.0 / (m + 1) as f64; m + 1],
        _ => profile.stratum_weights(),
    }
}

/// `1 / C(n-k, ℓ)` for `ℓ = 0..=n-k`.
pub(crate) fn inverse_binomials(n: usize, k: usize) -> Vec<f64> {
    (0..=n - k).map(|l| 1.0 / binomial(n - k, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::cii_weights;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn set(p: &[usize], n: usize) -> Coalition {
        Coalition::from_players(p.iter().copied(), n).unwrap()
    }

    #[test]
    fn assign_examples() {
        let n = 5;
        assert_eq!(stratum_assign(set(&[1, 3, 4], n), set(&[1, 2], n)), (set(&[1], n), 2));
        assert_eq!(stratum_assign(Coalition::EMPTY, set(&[0, 4], n)), (Coalition::EMPTY, 0));
        let k = set(&[2, 3], n);
        assert_eq!(stratum_assign(Coalition::full(n), k), (k, n - 2));
    }

    #[test]
    fn update_mean_examples() {
        assert_eq!(update_mean(0.0, 0, 5.0), 5.0);
        assert_eq!(update_mean(2.0, 1, 4.0), 3.0);
        assert_eq!(update_mean(3.0, 3, 3.0), 3.0);
    }

    #[test]
    fn local_index_round_trips() {
        let t = StrataTable::new(6, 3).unwrap();
        for (rank, &key) in t.keys().iter().enumerate() {
            for w in key.subsets() {
                let local = t.local_w(rank, w);
                assert_eq!(t.w_from_local(rank, local), w);
            }
        }
    }

    #[test]
    fn update_touches_one_stratum_per_key() {
        let mut t = StrataTable::new(7, 2).unwrap();
        let a = set(&[0, 2, 5], 7);
        t.update(a, 1.5);
        assert_eq!(t.counts.iter().sum::<u64>(), 21);
        for &key in t.keys.clone().iter() {
            let (w, l) = stratum_assign(a, key);
            assert_eq!(t.count(key, w, l), Some(1));
            assert_eq!(t.estimate(key, w, l), Some(1.5));
        }
    }

    #[test]
    fn pairs_check_on_zero_table() {
        let t = StrataTable::new(6, 2).unwrap();
        assert!(t.aggregate_pairs_check().unwrap().scores().iter().all(|&v| v == 0.0));
        assert!(StrataTable::new(6, 3).unwrap().aggregate_pairs_check().is_err());
    }

    proptest! {
        #[test]
        fn pairs_check_is_bitwise_equal(n in 4usize..12, seed in any::<u64>()) {
            let mut t = StrataTable::new(n, 2).unwrap();
            let mut rng = rng_from_seed(seed);
            for e in t.estimates_mut() {
                *e = rng.gen_range(-10.0..10.0);
            }
            let generic = t.aggregate(&cii_weights(IndexKind::Sii, n, 2).unwrap()).unwrap();
            let pairs = t.aggregate_pairs_check().unwrap();
            for (a, b) in generic.scores().iter().zip(pairs.scores()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}

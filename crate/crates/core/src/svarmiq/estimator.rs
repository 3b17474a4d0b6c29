use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::game::{BudgetedOracle, Game};
use crate::index::{cii_weights, EstimateMap, IndexKind};
use crate::rng::{rng_from_seed, Rng};

use super::borders::{compute_borders, BorderPlan};
use super::distribution::SizeDistribution;
use super::strata::StrataTable;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub orders: Vec<usize>,
    pub kinds: Vec<IndexKind>,
    pub warmup: bool,
    pub seed: u64,
}

impl EstimatorConfig {
    pub fn new(orders: Vec<usize>, kinds: Vec<IndexKind>, seed: u64) -> Self {
        EstimatorConfig { orders, kinds, warmup: false, seed }
    }

    pub fn single(k: usize, kind: IndexKind, seed: u64) -> Self {
        Self::new(alloc::vec![k], alloc::vec![kind], seed)
    }

    pub fn with_warmup(mut self, warmup: bool) -> Self {
        self.warmup = warmup;
        self
    }

    /// Requested `(order, kind)` pairs, skipping kinds undefined at an order.
    pub fn outputs(&self) -> Vec<(usize, IndexKind)> {
        let mut out = Vec::new();
        for &k in &self.orders {
            for &kind in &self.kinds {
                if kind.supports_order(k) && !out.contains(&(k, kind)) {
                    out.push((k, kind));
                }
            }
        }
        out
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.orders.is_empty() || self.kinds.is_empty() {
            return Err(Error::InvalidParameter("at least one order and one kind are required"));
        }
        if let Some(&k) = self.orders.iter().find(|&&k| k == 0 || k > n) {
            return Err(Error::InvalidOrder { n, k });
        }
        if self.outputs().is_empty() {
            return Err(Error::ShapleyOrder(*self.orders.iter().max().unwrap()));
        }
        Ok(())
    }

    /// Distinct orders in ascending order.
    fn distinct_orders(&self) -> Vec<usize> {
        let mut orders = self.orders.clone();
        orders.sort_unstable();
        orders.dedup();
        orders
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionChoice {
    Pairs,
    Uniform,
}

impl DistributionChoice {
    /// Pairwise distribution when every maintained order is at most 2 and 2
    /// is among them; uniform otherwise.
    pub fn for_orders(orders: &[usize]) -> Self {
        if orders.contains(&2) && orders.iter().all(|&k| k <= 2) {
            DistributionChoice::Pairs
        } else {
            DistributionChoice::Uniform
        }
    }

    pub fn build(self, n: usize) -> Result<SizeDistribution> {
        match self {
            DistributionChoice::Pairs => SizeDistribution::pairs(n),
            DistributionChoice::Uniform => SizeDistribution::uniform(n),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DistributionChoice::Pairs => "pairs",
            DistributionChoice::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub budget: u64,
    pub s_exp: usize,
    /// Budget after the border enumeration.
    pub leftover_after_borders: u64,
    /// Budget after borders and warm-up; the sampling-loop length.
    pub leftover_after_warmup: u64,
    pub border_calls: u64,
    pub warmup_calls: u64,
    pub loop_calls: u64,
    /// Budget not spent because no size was left to sample.
    pub unused_budget: u64,
    pub empty_strata: usize,
    pub seed: u64,
    pub distribution: DistributionChoice,
    pub warmup: bool,
}

impl Diagnostics {
    pub fn calls_used(&self) -> u64 {
        self.border_calls + self.warmup_calls + self.loop_calls
    }
}

#[derive(Debug, Clone)]
pub struct SvarmIqOutput {
    /// One map per `(order, kind)` in [`EstimatorConfig::outputs`] order.
    pub estimates: Vec<EstimateMap>,
    /// One table per distinct order, ascending.
    pub tables: Vec<StrataTable>,
    pub plan: BorderPlan,
    pub diagnostics: Diagnostics,
}

impl SvarmIqOutput {
    pub fn estimate(&self, k: usize, kind: IndexKind) -> Option<&EstimateMap> {
        self.estimates.iter().find(|e| e.order() == k && e.kind() == kind)
    }

    pub fn table(&self, k: usize) -> Option<&StrataTable> {
        self.tables.iter().find(|t| t.order() == k)
    }
}

/// Seeds every implicit stratum with one sample: for `(K, W, ℓ)` a uniform
/// `S ⊆ N \ K` with `|S| = ℓ` is drawn and `v(S ∪ W)` stored with count 1.
pub fn warmup<G: Game + ?Sized>(
    tables: &mut [StrataTable],
    oracle: &mut BudgetedOracle<'_, G>,
    plan: &BorderPlan,
    rng: &mut Rng,
) -> Result<u64> {
    let needed: u64 = tables.iter().map(|t| plan.implicit_strata(t.order())).sum();
    if needed > oracle.remaining() {
        return Err(Error::InsufficientBudget { needed, available: oracle.remaining() });
    }
    let n = plan.n();
    let mut outside: Vec<u8> = Vec::with_capacity(n);
    let mut calls = 0;
    for table in tables.iter_mut() {
        let strata: Vec<_> = table.implicit_strata().collect();
        for (rank, local, l) in strata {
            let key = table.keys()[rank];
            outside.clear();
            outside.extend((0..n as u8).filter(|&p| !key.contains(p as usize)));
            let (chosen, _) = outside.partial_shuffle(rng, l);
            let s = chosen.iter().fold(0u64, |acc, &p| acc | 1 << p);
            let a = Coalition::from_bits_unchecked(s).union(table.w_from_local(rank, local));
            let v = oracle.evaluate(a)?;
            calls += 1;
            table.seed_stratum(rank, local, l, v);
        }
    }
    Ok(calls)
}

/// Runs SVARM-IQ with the oracle's whole remaining budget.
///
/// All requested orders share every evaluation: the border enumeration,
/// the optional warm-up and each sampled coalition update one stratum of
/// every interaction set of every order, and any number of index kinds are
/// read off the same tables at the end.
pub fn run_svarm_iq<G: Game + ?Sized>(
    oracle: &mut BudgetedOracle<'_, G>,
    config: &EstimatorConfig,
) -> Result<SvarmIqOutput> {
    let n = oracle.players();
    if n < 4 {
        return Err(Error::InvalidParameter("SVARM-IQ needs at least 4 players"));
    }
    config.validate(n)?;
    let orders = config.distinct_orders();
    let choice = DistributionChoice::for_orders(&orders);
    let p = choice.build(n)?;
    let mut rng = rng_from_seed(config.seed);
    let budget = oracle.remaining();

    let mut tables = orders
        .iter()
        .map(|&k| StrataTable::new(n, k))
        .collect::<Result<Vec<_>>>()?;

    let start = oracle.calls_used();
    let plan = compute_borders(oracle, &p, &mut tables, config.warmup.then_some(&orders[..]))?;
    let border_calls = oracle.calls_used() - start;

    let warmup_calls = if config.warmup {
        warmup(&mut tables, oracle, &plan, &mut rng)?
    } else {
        0
    };
    let leftover_after_warmup = oracle.remaining();

    let implicit = plan.implicit_sizes();
    let mut loop_calls = 0;
    if !implicit.is_empty() {
        let sampler = WeightedIndex::new(implicit.iter().map(|&s| plan.distribution().prob(s)))
            .map_err(|_| Error::InvalidParameter("degenerate size distribution"))?;
        let mut players: Vec<u8> = (0..n as u8).collect();
        while oracle.remaining() > 0 {
            let size = implicit[sampler.sample(&mut rng)];
            let (chosen, _) = players.partial_shuffle(&mut rng, size);
            let a = Coalition::from_bits_unchecked(chosen.iter().fold(0u64, |acc, &p| acc | 1 << p));
            let v = oracle.evaluate(a)?;
            loop_calls += 1;
            for table in tables.iter_mut() {
                table.update(a, v);
            }
        }
    }

    let estimates = config
        .outputs()
        .into_iter()
        .map(|(k, kind)| {
            let table = tables.iter().find(|t| t.order() == k).expect("table per order");
            table.aggregate(&cii_weights(kind, n, k)?)
        })
        .collect::<Result<Vec<_>>>()?;

    let diagnostics = Diagnostics {
        budget,
        s_exp: plan.s_exp(),
        leftover_after_borders: plan.leftover(),
        leftover_after_warmup,
        border_calls,
        warmup_calls,
        loop_calls,
        unused_budget: oracle.remaining(),
        empty_strata: tables.iter().map(|t| t.empty_strata()).sum(),
        seed: config.seed,
        distribution: choice,
        warmup: config.warmup,
    };
    Ok(SvarmIqOutput { estimates, tables, plan, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::exact_cii;
    use crate::game::SoumGame;

    #[test]
    fn distribution_selection() {
        assert_eq!(DistributionChoice::for_orders(&[2]), DistributionChoice::Pairs);
        assert_eq!(DistributionChoice::for_orders(&[1, 2]), DistributionChoice::Pairs);
        assert_eq!(DistributionChoice::for_orders(&[1]), DistributionChoice::Uniform);
        assert_eq!(DistributionChoice::for_orders(&[2, 3]), DistributionChoice::Uniform);
    }

    #[test]
    fn full_budget_is_exact() {
        let g = SoumGame::generate(7, 40, 5).unwrap();
        let config = EstimatorConfig::new(alloc::vec![1, 2, 3], IndexKind::ALL.to_vec(), 1);
        let mut oracle = BudgetedOracle::new(&g, 128);
        let out = run_svarm_iq(&mut oracle, &config).unwrap();
        assert_eq!(out.estimates.len(), 1 + 4 + 4 + 4);
        for est in &out.estimates {
            let truth = exact_cii(&g, est.kind(), est.order()).unwrap();
            assert!(est.max_abs_diff(&truth).unwrap() < 1e-9);
        }
        assert_eq!(out.diagnostics.loop_calls, 0);
        assert_eq!(out.diagnostics.calls_used(), 128);
    }

    #[test]
    fn deterministic_given_seed() {
        let g = SoumGame::generate(8, 50, 11).unwrap();
        let config = EstimatorConfig::single(2, IndexKind::Sii, 42);
        let a = run_svarm_iq(&mut BudgetedOracle::new(&g, 150), &config).unwrap();
        let b = run_svarm_iq(&mut BudgetedOracle::new(&g, 150), &config).unwrap();
        assert_eq!(a.estimates, b.estimates);
        let c = run_svarm_iq(&mut BudgetedOracle::new(&g, 150), &EstimatorConfig::single(2, IndexKind::Sii, 43)).unwrap();
        assert_ne!(a.estimates, c.estimates);
    }

    #[test]
    fn budget_is_spent_exactly() {
        let g = SoumGame::generate(9, 50, 3).unwrap();
        for budget in [20u64, 57, 150, 400] {
            let mut oracle = BudgetedOracle::new(&g, budget);
            let out = run_svarm_iq(&mut oracle, &EstimatorConfig::single(2, IndexKind::Sii, 9)).unwrap();
            let d = &out.diagnostics;
            assert_eq!(oracle.calls_used(), budget);
            assert_eq!(d.calls_used(), budget);
            assert_eq!(d.border_calls, out.plan.border_calls());
            assert_eq!(d.leftover_after_borders, budget - d.border_calls);
        }
    }

    #[test]
    fn warmup_seeds_every_implicit_stratum() {
        let g = SoumGame::generate(6, 50, 1).unwrap();
        let mut oracle = BudgetedOracle::new(&g, 220);
        let out = run_svarm_iq(&mut oracle, &EstimatorConfig::single(2, IndexKind::Sii, 5).with_warmup(true)).unwrap();
        let d = &out.diagnostics;
        assert_eq!(d.s_exp, 1);
        assert_eq!(d.warmup_calls, 180);
        assert_eq!(d.leftover_after_warmup, 220 - 14 - 180);
        let t = out.table(2).unwrap();
        assert!(t.implicit_strata().all(|(r, w, l)| t.count_at(r, w, l) >= 1));
        assert_eq!(d.empty_strata, 0);
    }

    #[test]
    fn warmup_noop_without_implicit_sizes() {
        let g = SoumGame::generate(6, 50, 1).unwrap();
        let mut oracle = BudgetedOracle::new(&g, 64);
        let out = run_svarm_iq(&mut oracle, &EstimatorConfig::single(2, IndexKind::Sii, 5).with_warmup(true)).unwrap();
        assert_eq!(out.diagnostics.warmup_calls, 0);
        assert!(out.plan.implicit_sizes().is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = SoumGame::generate(6, 5, 1).unwrap();
        let cfg = EstimatorConfig::single(2, IndexKind::Sii, 0);
        assert!(matches!(run_svarm_iq(&mut BudgetedOracle::new(&g, 13), &cfg), Err(Error::InsufficientBudget { .. })));
        let cfg = EstimatorConfig::single(7, IndexKind::Sii, 0);
        assert!(run_svarm_iq(&mut BudgetedOracle::new(&g, 64), &cfg).is_err());
        let cfg = EstimatorConfig::single(2, IndexKind::Sv, 0);
        assert_eq!(run_svarm_iq(&mut BudgetedOracle::new(&g, 64), &cfg).unwrap_err(), Error::ShapleyOrder(2));
        let small = SoumGame::generate(3, 5, 1).unwrap();
        assert!(run_svarm_iq(&mut BudgetedOracle::new(&small, 8), &EstimatorConfig::single(1, IndexKind::Sv, 0)).is_err());
        // warm-up that cannot fit even after enumerating size pair 2
        let g8 = SoumGame::generate(8, 5, 1).unwrap();
        let cfg = EstimatorConfig::single(2, IndexKind::Sii, 0).with_warmup(true);
        assert!(matches!(run_svarm_iq(&mut BudgetedOracle::new(&g8, 96), &cfg), Err(Error::InsufficientBudget { .. })));
    }

    #[test]
    fn value_scaling_scales_estimates() {
        let g = SoumGame::generate(8, 50, 2).unwrap();
        let scaled = SoumGame::new(8, g.terms().iter().map(|&(t, c)| (t, c * 4.0)).collect()).unwrap();
        let cfg = EstimatorConfig::single(2, IndexKind::Sii, 77);
        let a = run_svarm_iq(&mut BudgetedOracle::new(&g, 120), &cfg).unwrap();
        let b = run_svarm_iq(&mut BudgetedOracle::new(&scaled, 120), &cfg).unwrap();
        for (x, y) in a.estimates[0].scores().iter().zip(b.estimates[0].scores()) {
            assert!((x * 4.0 - y).abs() < 1e-9);
        }
    }
}

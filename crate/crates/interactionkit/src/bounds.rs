//! Per-interaction bound reports with optional Monte-Carlo comparison.

use std::io::Write;

use anyhow::{bail, Context, Result};
use interactionkit_core::eval::{
    chebyshev_bound, gamma_factor, hoeffding_bound, leftover_budget, strata_statistics, variance_bound,
    ProbabilityBound,
};
use interactionkit_core::index::cii_weights;
use interactionkit_core::rng::run_seed;
use interactionkit_core::svarmiq::{plan_borders, run_svarm_iq, DistributionChoice, EstimatorConfig};
use interactionkit_core::{BudgetedOracle, Coalition, Game, IndexKind};
use rayon::prelude::*;

use crate::source::GameSource;

#[derive(Debug, Clone)]
pub struct BoundsConfig {
    pub kind: IndexKind,
    pub order: usize,
    pub budget: u64,
    pub eps: Vec<f64>,
    /// Number of warm-up runs for the empirical columns.
    pub empirical: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub key: Coalition,
    pub variance_bound: f64,
    pub chebyshev: Vec<ProbabilityBound>,
    pub hoeffding: Vec<ProbabilityBound>,
    pub empirical_variance: Option<f64>,
    /// Fraction of runs with `|Î_K - I_K| > ε`, one per `ε`.
    pub exceedance: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub n: usize,
    pub order: usize,
    pub kind: IndexKind,
    pub budget: u64,
    pub s_exp: usize,
    pub warmup_calls: u64,
    pub b_tilde: u64,
    pub gamma: f64,
    pub eps: Vec<f64>,
    pub runs: Option<u64>,
    pub rows: Vec<BoundsRow>,
}

impl BoundsReport {
    pub fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("order", self.order.to_string()),
            ("kind", self.kind.to_string()),
            ("budget", self.budget.to_string()),
            ("s_exp", self.s_exp.to_string()),
            ("warmup_calls", self.warmup_calls.to_string()),
            ("b_tilde", self.b_tilde.to_string()),
            ("gamma", self.gamma.to_string()),
            ("runs", self.runs.map_or("0".into(), |r| r.to_string())),
        ]
    }
}

/// Bounds of every interaction of one order and kind for SVARM-IQ with
/// warm-up at `budget`.
pub fn bounds_report(game: &GameSource, config: &BoundsConfig) -> Result<BoundsReport> {
    let n = game.players();
    let k = config.order;
    game.check_order(k)?;
    if !config.kind.supports_order(k) {
        bail!("{} is not defined at order {k}", config.kind);
    }
    if config.eps.iter().any(|&e| !(e > 0.0)) {
        bail!("every epsilon must be positive");
    }
    let gamma = gamma_factor(n, k)?;
    let p = DistributionChoice::for_orders(&[k]).build(n)?;
    let plan = plan_borders(n, config.budget, &p, Some(&[k]))?;
    let warmup_calls = plan.implicit_strata(k);
    let b_tilde = leftover_budget(config.budget, &plan, warmup_calls)
        .context("the bounds need budget left after borders and warm-up")?;
    let stats = strata_statistics(game, k, &plan)?;
    let weights = cii_weights(config.kind, n, k)?;

    let mut rows = stats
        .keys()
        .iter()
        .map(|&key| {
            Ok(BoundsRow {
                key,
                variance_bound: variance_bound(&stats, &weights, b_tilde, gamma, key)?,
                chebyshev: config
                    .eps
                    .iter()
                    .map(|&e| chebyshev_bound(&stats, &weights, b_tilde, gamma, key, e))
                    .collect::<Result<_, _>>()?,
                hoeffding: config
                    .eps
                    .iter()
                    .map(|&e| hoeffding_bound(&stats, &weights, b_tilde, gamma, key, e))
                    .collect::<Result<_, _>>()?,
                empirical_variance: None,
                exceedance: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(runs) = config.empirical {
        if runs < 2 {
            bail!("the empirical comparison needs at least 2 runs");
        }
        let truth = game.ground_truth(config.kind, k)?;
        let samples: Vec<Vec<f64>> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let cfg = EstimatorConfig::single(k, config.kind, run_seed(config.seed, r)).with_warmup(true);
                let out = run_svarm_iq(&mut BudgetedOracle::new(game, config.budget), &cfg)?;
                Ok(out.estimates[0].scores().to_vec())
            })
            .collect::<Result<_>>()?;
        let rf = runs as f64;
        for (i, row) in rows.iter_mut().enumerate() {
            let mean = samples.iter().map(|s| s[i]).sum::<f64>() / rf;
            let var = samples.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (rf - 1.0);
            row.empirical_variance = Some(var);
            let t = truth.scores()[i];
            row.exceedance = config
                .eps
                .iter()
                .map(|&e| samples.iter().filter(|s| (s[i] - t).abs() > e).count() as f64 / rf)
                .collect();
        }
    }

    Ok(BoundsReport {
        n,
        order: k,
        kind: config.kind,
        budget: config.budget,
        s_exp: plan.s_exp(),
        warmup_calls,
        b_tilde,
        gamma,
        eps: config.eps.clone(),
        runs: config.empirical,
        rows,
    })
}

pub fn write_bounds<W: Write>(w: W, report: &BoundsReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["key".to_string(), "variance_bound".to_string()];
    for e in &report.eps {
        header.push(format!("chebyshev@{e}"));
        header.push(format!("chebyshev_raw@{e}"));
        header.push(format!("hoeffding@{e}"));
        header.push(format!("hoeffding_raw@{e}"));
    }
    if report.runs.is_some() {
        header.push("empirical_variance".into());
        header.push("variance_ok".into());
        for e in &report.eps {
            header.push(format!("exceedance@{e}"));
        }
    }
    out.write_record(&header)?;
    for row in &report.rows {
        let mut rec = vec![row.key.to_bitstring(report.n), row.variance_bound.to_string()];
        for (c, h) in row.chebyshev.iter().zip(&row.hoeffding) {
            rec.extend([c.clipped, c.raw, h.clipped, h.raw].map(|v| v.to_string()));
        }
        if let Some(var) = row.empirical_variance {
            rec.push(var.to_string());
            rec.push((var <= row.variance_bound).to_string());
            rec.extend(row.exceedance.iter().map(|v| v.to_string()));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use interactionkit_core::TabularGame;

    #[test]
    fn constant_game_has_zero_bounds() {
        let game = GameSource::Tabular(TabularGame::from_fn(6, |_| 2.0).unwrap());
        let config = BoundsConfig {
            kind: IndexKind::Sii,
            order: 2,
            budget: 220,
            eps: vec![0.05, 0.1],
            empirical: None,
            seed: 0,
        };
        let report = bounds_report(&game, &config).unwrap();
        assert_eq!(report.b_tilde, 26);
        for row in &report.rows {
            assert_eq!(row.variance_bound, 0.0);
            assert!(row.chebyshev.iter().chain(&row.hoeffding).all(|b| b.raw == 0.0));
        }
    }

    #[test]
    fn rejects_order_one_and_small_budget() {
        let game = GameSource::generate(6, 10, 1).unwrap();
        let mut config = BoundsConfig {
            kind: IndexKind::Sv,
            order: 1,
            budget: 220,
            eps: vec![0.1],
            empirical: None,
            seed: 0,
        };
        assert!(bounds_report(&game, &config).is_err());
        config.kind = IndexKind::Sii;
        config.order = 2;
        config.budget = 30;
        assert!(bounds_report(&game, &config).is_err());
    }
}

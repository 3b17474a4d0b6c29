//! Multi-run budget sweeps: every method at every budget, `runs` times,
//! scored against ground truth computed once.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use interactionkit_core::baselines::{permutation_sii, permutation_sti};
use interactionkit_core::eval::{mean_and_se, mse, prec_at, PREC_DEFAULT};
use interactionkit_core::rng::run_seed;
use interactionkit_core::svarmiq::{run_svarm_iq, EstimatorConfig};
use interactionkit_core::{BudgetedOracle, EstimateMap, IndexKind};
use rayon::prelude::*;

use crate::source::GameSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    SvarmIq,
    PermSii,
    PermSti,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::SvarmIq, Method::PermSii, Method::PermSti];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SvarmIq => "svarm-iq",
            Method::PermSii => "perm-sii",
            Method::PermSti => "perm-sti",
        }
    }

    /// The `(order, kind)` pairs this method produces out of the requested
    /// ones. Permutation SII covers SII (SV at order 1), permutation STI
    /// covers STI at the highest requested order only.
    pub fn outputs(self, orders: &[usize], kinds: &[IndexKind]) -> Vec<(usize, IndexKind)> {
        match self {
            Method::SvarmIq => EstimatorConfig::new(orders.to_vec(), kinds.to_vec(), 0).outputs(),
            Method::PermSii => {
                let mut out = Vec::new();
                for &k in orders {
                    let kind = if k == 1 { IndexKind::Sv } else { IndexKind::Sii };
                    let wanted = kinds.contains(&kind) || (k == 1 && kinds.contains(&IndexKind::Sii));
                    if wanted && !out.contains(&(k, kind)) {
                        out.push((k, kind));
                    }
                }
                out
            }
            Method::PermSti => {
                let top = orders.iter().copied().max().unwrap_or(0);
                let kind = if top == 1 { IndexKind::Sv } else { IndexKind::Sti };
                let wanted = kinds.contains(&kind) || (top == 1 && kinds.contains(&IndexKind::Sti));
                if top > 0 && wanted {
                    vec![(top, kind)]
                } else {
                    Vec::new()
                }
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svarm-iq" | "svarmiq" => Ok(Method::SvarmIq),
            "perm-sii" => Ok(Method::PermSii),
            "perm-sti" => Ok(Method::PermSti),
            _ => bail!("unknown method {s:?} (expected svarm-iq, perm-sii or perm-sti)"),
        }
    }
}

/// One method run at one budget.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub estimates: Vec<EstimateMap>,
    pub calls: u64,
    pub fields: Vec<(&'static str, String)>,
}

/// Runs `method` once with `budget` oracle calls.
pub fn run_method(
    game: &GameSource,
    method: Method,
    orders: &[usize],
    kinds: &[IndexKind],
    budget: u64,
    seed: u64,
    warmup: bool,
) -> Result<MethodRun> {
    let outputs = method.outputs(orders, kinds);
    if outputs.is_empty() {
        bail!("{method} produces none of the requested kinds and orders");
    }
    let run = match method {
        Method::SvarmIq => {
            let mut oracle = BudgetedOracle::new(game, budget);
            let config = EstimatorConfig::new(orders.to_vec(), kinds.to_vec(), seed).with_warmup(warmup);
            let out = run_svarm_iq(&mut oracle, &config)?;
            let d = &out.diagnostics;
            MethodRun {
                calls: oracle.calls_used(),
                fields: vec![
                    ("method", method.to_string()),
                    ("budget", d.budget.to_string()),
                    ("s_exp", d.s_exp.to_string()),
                    ("leftover_after_borders", d.leftover_after_borders.to_string()),
                    ("leftover_after_warmup", d.leftover_after_warmup.to_string()),
                    ("border_calls", d.border_calls.to_string()),
                    ("warmup_calls", d.warmup_calls.to_string()),
                    ("loop_calls", d.loop_calls.to_string()),
                    ("unused_budget", d.unused_budget.to_string()),
                    ("empty_strata", d.empty_strata.to_string()),
                    ("seed", d.seed.to_string()),
                    ("distribution", d.distribution.as_str().to_string()),
                    ("warmup", d.warmup.to_string()),
                    ("calls", oracle.calls_used().to_string()),
                ],
                estimates: out.estimates,
            }
        }
        Method::PermSii | Method::PermSti => {
            // orders share nothing under permutation sampling, so the budget
            // is split evenly between them
            let share = budget / outputs.len() as u64;
            let mut remaining = budget;
            let mut estimates = Vec::new();
            let mut permutations = Vec::new();
            let mut never = Vec::new();
            for (i, &(k, _)) in outputs.iter().enumerate() {
                let allowance = if i + 1 == outputs.len() { remaining } else { share };
                let mut oracle = BudgetedOracle::new(game, allowance);
                let out = match method {
                    Method::PermSii => permutation_sii(&mut oracle, k, seed)?,
                    _ => permutation_sti(&mut oracle, k, seed)?,
                };
                remaining -= oracle.calls_used();
                permutations.push(out.permutations.to_string());
                never.push(out.never_updated().to_string());
                estimates.push(out.estimates);
            }
            let calls = budget - remaining;
            let fields = vec![
                ("method", method.to_string()),
                ("budget", budget.to_string()),
                ("permutations", permutations.join(";")),
                ("never_updated", never.join(";")),
                ("seed", seed.to_string()),
                ("calls", calls.to_string()),
            ];
            MethodRun { estimates, calls, fields }
        }
    };
    Ok(run)
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub kinds: Vec<IndexKind>,
    pub orders: Vec<usize>,
    pub budgets: Vec<u64>,
    pub runs: u64,
    pub master_seed: u64,
    pub warmup: bool,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub method: Method,
    pub kind: IndexKind,
    pub order: usize,
    pub budget: u64,
    pub run: u64,
    pub seed: u64,
    pub mse: f64,
    pub prec_at_10: f64,
    pub calls: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: String,
    pub kind: String,
    pub order: usize,
    pub budget: u64,
    pub mse_mean: f64,
    pub mse_se: f64,
    pub prec_mean: f64,
    pub prec_se: f64,
}

pub const SWEEP_HEADER: [&str; 10] = ["method", "kind", "order", "budget", "run", "seed", "mse", "prec_at_10", "calls", "wall_ms"];
pub const AGGREGATE_HEADER: [&str; 8] = ["method", "kind", "order", "budget", "mse_mean", "mse_se", "prec_mean", "prec_se"];

/// Runs the sweep. Run `r` of every method and budget uses the seed
/// `run_seed(master_seed, r)`. Records come back ordered by method, budget,
/// run, order and kind.
pub fn run_sweep(game: &GameSource, config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    if config.methods.is_empty() || config.budgets.is_empty() || config.runs == 0 {
        bail!("a sweep needs at least one method, one budget and one run");
    }
    for &k in &config.orders {
        game.check_order(k)?;
    }
    let mut truth: BTreeMap<(usize, IndexKind), EstimateMap> = BTreeMap::new();
    for &m in &config.methods {
        let outputs = m.outputs(&config.orders, &config.kinds);
        if outputs.is_empty() {
            bail!("{m} produces none of the requested kinds and orders");
        }
        for (k, kind) in outputs {
            if let std::collections::btree_map::Entry::Vacant(e) = truth.entry((k, kind)) {
                e.insert(game.ground_truth(kind, k)?);
            }
        }
    }

    let mut tasks = Vec::new();
    for &m in &config.methods {
        for &b in &config.budgets {
            for r in 0..config.runs {
                tasks.push((m, b, r));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build()?;
    let results: Vec<Vec<SweepRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(method, budget, run)| {
                let seed = run_seed(config.master_seed, run);
                let start = Instant::now();
                let out = run_method(game, method, &config.orders, &config.kinds, budget, seed, config.warmup)
                    .with_context(|| format!("{method} at budget {budget}, run {run}"))?;
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                out.estimates
                    .iter()
                    .map(|est| {
                        let gt = &truth[&(est.order(), est.kind())];
                        Ok(SweepRecord {
                            method,
                            kind: est.kind(),
                            order: est.order(),
                            budget,
                            run,
                            seed,
                            mse: mse(est, gt)?,
                            prec_at_10: prec_at(est, gt, PREC_DEFAULT)?,
                            calls: out.calls,
                            wall_ms,
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()
    })?;
    let mut records: Vec<SweepRecord> = results.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        (a.method, a.budget, a.run, a.order, a.kind).cmp(&(b.method, b.budget, b.run, b.order, b.kind))
    });
    Ok(records)
}

/// Mean and standard error per `(method, kind, order, budget)`.
pub fn aggregate(records: &[SweepRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(Method, usize, IndexKind, u64), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let g = groups.entry((r.method, r.order, r.kind, r.budget)).or_default();
        g.0.push(r.mse);
        g.1.push(r.prec_at_10);
    }
    groups
        .into_iter()
        .map(|((method, order, kind, budget), (m, p))| {
            let (mse_mean, mse_se) = mean_and_se(&m);
            let (prec_mean, prec_se) = mean_and_se(&p);
            AggregateRow {
                method: method.to_string(),
                kind: kind.to_string(),
                order,
                budget,
                mse_mean,
                mse_se,
                prec_mean,
                prec_se,
            }
        })
        .collect()
}

pub fn write_records<W: Write>(w: W, records: &[SweepRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for r in records {
        out.write_record([
            r.method.to_string(),
            r.kind.to_string(),
            r.order.to_string(),
            r.budget.to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            r.mse.to_string(),
            r.prec_at_10.to_string(),
            r.calls.to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(w: W, rows: &[AggregateRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        out.write_record([
            r.method.clone(),
            r.kind.clone(),
            r.order.to_string(),
            r.budget.to_string(),
            r.mse_mean.to_string(),
            r.mse_se.to_string(),
            r.prec_mean.to_string(),
            r.prec_se.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_aggregate<R: Read>(r: R) -> Result<Vec<AggregateRow>> {
    let mut reader = csv::Reader::from_reader(r);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(AGGREGATE_HEADER) {
        bail!("unexpected aggregate header {:?}", headers.iter().collect::<Vec<_>>());
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |j: usize| -> Result<f64> {
            rec[j].parse().with_context(|| format!("row {}: bad number {:?}", i + 2, &rec[j]))
        };
        rows.push(AggregateRow {
            method: rec[0].to_string(),
            kind: rec[1].to_string(),
            order: rec[2].parse().with_context(|| format!("row {}: bad order", i + 2))?,
            budget: rec[3].parse().with_context(|| format!("row {}: bad budget", i + 2))?,
            mse_mean: num(4)?,
            mse_se: num(5)?,
            prec_mean: num(6)?,
            prec_se: num(7)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_outputs() {
        let kinds = [IndexKind::Sii, IndexKind::Sti, IndexKind::Bii];
        assert_eq!(Method::PermSii.outputs(&[2, 3], &kinds), vec![(2, IndexKind::Sii), (3, IndexKind::Sii)]);
        assert_eq!(Method::PermSti.outputs(&[2, 3], &kinds), vec![(3, IndexKind::Sti)]);
        assert!(Method::PermSti.outputs(&[2], &[IndexKind::Sii]).is_empty());
        assert_eq!(Method::SvarmIq.outputs(&[2], &kinds).len(), 3);
        assert_eq!("perm-sti".parse::<Method>().unwrap(), Method::PermSti);
        assert!("shap-iq".parse::<Method>().is_err());
    }
}

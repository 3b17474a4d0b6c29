use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use interactionkit::bounds::{bounds_report, write_bounds, BoundsConfig};
use interactionkit::formats;
use interactionkit::sweep::{aggregate, read_aggregate, run_method, write_aggregate, write_records};
use interactionkit::svg::write_charts;
use interactionkit::{run_sweep, GameSource, Method, SweepConfig};
use interactionkit_core::index::{exact_cii_many, nsii_aggregate, soum_exact_cii, EXACT_MAX_PLAYERS};
use interactionkit_core::{Coalition, EstimateMap, Game, IndexKind, SoumGame, MAX_PLAYERS};

#[derive(Parser)]
#[command(name = "interactionkit", version, about = "Exact and sampled cardinal interaction indices of cooperative games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random sum of unanimity games
    SoumGen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        terms: usize,
        #[arg(long, env = "INTERACTIONKIT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ground-truth interaction values
    Exact {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long = "kind", required = true)]
        kinds: Vec<IndexKind>,
        #[arg(long = "order", required = true)]
        orders: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Oracle::ClosedForm)]
        oracle: Oracle,
        /// Also write n-SII values up to this order
        #[arg(long)]
        nsii: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Approximate interaction values with a fixed budget
    Approx {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value = "svarm-iq")]
        method: Method,
        #[arg(long = "kind", required = true)]
        kinds: Vec<IndexKind>,
        #[arg(long = "order", required = true)]
        orders: Vec<usize>,
        #[arg(long)]
        budget: u64,
        #[arg(long, env = "INTERACTIONKIT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        warmup: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated runs over several budgets, with aggregate errors
    Sweep {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long = "method")]
        methods: Vec<Method>,
        #[arg(long = "kind", required = true)]
        kinds: Vec<IndexKind>,
        #[arg(long = "order", required = true)]
        orders: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<u64>,
        #[arg(long, default_value_t = 30)]
        runs: u64,
        #[arg(long, env = "INTERACTIONKIT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        warmup: bool,
        #[arg(long)]
        plot: bool,
        /// Worker threads, 0 for all cores
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Variance and tail bounds of SVARM-IQ with warm-up
    Bounds {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value = "sii")]
        kind: IndexKind,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long)]
        budget: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        eps: Vec<f64>,
        #[arg(long)]
        empirical: Option<u64>,
        #[arg(long, env = "INTERACTIONKIT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Redraw the charts of a sweep from its aggregate.csv
    Plot {
        #[arg(long)]
        aggregate: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GameArgs {
    /// Game file: `.soum` for unanimity terms, anything else a full table
    #[arg(long, conflicts_with_all = ["n", "terms"])]
    game: Option<PathBuf>,
    /// Player count of a generated unanimity game
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long, default_value_t = 0)]
    game_seed: u64,
}

impl GameArgs {
    fn load(&self) -> Result<GameSource> {
        match (&self.game, self.n) {
            (Some(path), _) => GameSource::load(path),
            (None, Some(n)) => {
                check_players(n)?;
                GameSource::generate(n, self.terms.unwrap_or(50), self.game_seed)
            }
            (None, None) => bail!("give either --game or --n"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    ClosedForm,
    Enumerate,
}

fn check_players(n: usize) -> Result<()> {
    ensure!((1..=MAX_PLAYERS).contains(&n), "--n {n} outside 1..={MAX_PLAYERS}");
    Ok(())
}

fn check_orders(game: &GameSource, orders: &[usize]) -> Result<()> {
    for &k in orders {
        game.check_order(k)?;
    }
    Ok(())
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}

fn map_file(dir: &Path, map: &EstimateMap) -> PathBuf {
    dir.join(format!("{}_k{}.csv", map.kind(), map.order()))
}

fn requests(kinds: &[IndexKind], orders: &[usize]) -> Result<Vec<(IndexKind, usize)>> {
    let mut out = Vec::new();
    for &k in orders {
        for &kind in kinds {
            if kind.supports_order(k) && !out.contains(&(kind, k)) {
                out.push((kind, k));
            }
        }
    }
    ensure!(!out.is_empty(), "none of the requested kinds is defined at the requested orders");
    Ok(out)
}

fn soum_gen(n: usize, terms: usize, seed: u64, out: &Path) -> Result<()> {
    check_players(n)?;
    let game = SoumGame::generate(n, terms, seed)?;
    formats::save_soum(out, &game)?;
    println!("wrote {} terms to {}", game.terms().len(), out.display());
    Ok(())
}

fn exact(game: &GameSource, kinds: &[IndexKind], orders: &[usize], oracle: Oracle, nsii: Option<usize>, out: &Path) -> Result<()> {
    check_orders(game, orders)?;
    let reqs = requests(kinds, orders)?;
    let n = game.players();
    let closed = match (oracle, game.as_soum()) {
        (Oracle::ClosedForm, Some(soum)) => Some(soum),
        (Oracle::ClosedForm, None) => bail!("the closed form needs a unanimity game, use --oracle enumerate"),
        (Oracle::Enumerate, _) => None,
    };
    if closed.is_none() && n > EXACT_MAX_PLAYERS {
        bail!("enumeration supports at most {EXACT_MAX_PLAYERS} players, use the closed form");
    }
    let mut all = reqs.clone();
    if let Some(k_max) = nsii {
        check_orders(game, &[k_max])?;
        for k in 1..=k_max {
            if !all.contains(&(IndexKind::Sii, k)) {
                all.push((IndexKind::Sii, k));
            }
        }
    }
    let (maps, queries) = match closed {
        Some(soum) => (all.iter().map(|&(kind, k)| soum_exact_cii(soum, kind, k)).collect::<Result<Vec<_>, _>>()?, 0u64),
        None => (exact_cii_many(game, &all)?, 1u64 << n),
    };
    out_dir(out)?;
    for map in &maps[..reqs.len()] {
        formats::save_estimates(&map_file(out, map), map)?;
    }
    if let Some(k_max) = nsii {
        let sii: Vec<EstimateMap> = maps.iter().filter(|m| m.kind() == IndexKind::Sii).cloned().collect();
        let phi = nsii_aggregate(&sii, k_max)?;
        let mut rows: Vec<(Coalition, f64)> = phi.into_iter().collect();
        rows.sort_by_key(|(s, _)| (s.len(), s.bits()));
        let text: String = std::iter::once(format!("n={n},k={k_max},kind=nsii\n"))
            .chain(rows.iter().map(|(s, v)| format!("{},{v}\n", s.to_bitstring(n))))
            .collect();
        let path = out.join(format!("nsii_k{k_max}.csv"));
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let oracle_name = if closed.is_some() { "closed-form" } else { "enumerate" };
    formats::save_record(&out.join("exact.csv"), &[("oracle", oracle_name.into()), ("queries", queries.to_string())])?;
    println!("queries: {queries}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn approx(
    game: &GameSource,
    method: Method,
    kinds: &[IndexKind],
    orders: &[usize],
    budget: u64,
    seed: u64,
    warmup: bool,
    out: &Path,
) -> Result<()> {
    check_orders(game, orders)?;
    let run = run_method(game, method, orders, kinds, budget, seed, warmup)?;
    out_dir(out)?;
    for map in &run.estimates {
        formats::save_estimates(&map_file(out, map), map)?;
    }
    formats::save_record(&out.join("diagnostics.csv"), &run.fields)?;
    println!("calls: {}", run.calls);
    Ok(())
}

fn sweep(game: &GameSource, config: &SweepConfig, plot: bool, out: &Path) -> Result<()> {
    let records = run_sweep(game, config)?;
    let rows = aggregate(&records);
    out_dir(out)?;
    write_records(create(&out.join("sweep.csv"))?, &records)?;
    write_aggregate(create(&out.join("aggregate.csv"))?, &rows)?;
    if plot {
        write_charts(out, &rows)?;
    }
    println!("records: {}, aggregate rows: {}", records.len(), rows.len());
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn bounds(game: &GameSource, config: &BoundsConfig, out: &Path) -> Result<()> {
    let report = bounds_report(game, config)?;
    out_dir(out)?;
    write_bounds(create(&out.join("bounds.csv"))?, &report)?;
    formats::save_record(&out.join("bounds_meta.csv"), &report.metadata())?;
    if report.runs.is_some() {
        let ok = report.rows.iter().filter(|r| r.empirical_variance.is_some_and(|v| v <= r.variance_bound)).count();
        println!("variance within bound for {ok} of {} sets", report.rows.len());
    }
    println!("b_tilde: {}", report.b_tilde);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SoumGen { n, terms, seed, out } => soum_gen(n, terms, seed, &out),
        Command::Exact { game, kinds, orders, oracle, nsii, out } => exact(&game.load()?, &kinds, &orders, oracle, nsii, &out),
        Command::Approx { game, method, kinds, orders, budget, seed, warmup, out } => {
            approx(&game.load()?, method, &kinds, &orders, budget, seed, warmup, &out)
        }
        Command::Sweep { game, methods, kinds, orders, budgets, runs, seed, warmup, plot, jobs, out } => {
            let config = SweepConfig {
                methods: if methods.is_empty() {
                    Method::ALL.into_iter().filter(|m| !m.outputs(&orders, &kinds).is_empty()).collect()
                } else {
                    methods
                },
                kinds,
                orders,
                budgets,
                runs,
                master_seed: seed,
                warmup,
                jobs,
            };
            sweep(&game.load()?, &config, plot, &out)
        }
        Command::Bounds { game, kind, order, budget, eps, empirical, seed, out } => {
            let config = BoundsConfig { kind, order, budget, eps, empirical, seed };
            bounds(&game.load()?, &config, &out)
        }
        Command::Plot { aggregate, out } => {
            let rows = read_aggregate(fs::File::open(&aggregate).with_context(|| format!("cannot open {}", aggregate.display()))?)?;
            out_dir(&out)?;
            let paths = write_charts(&out, &rows)?;
            println!("charts: {}", paths.len());
            Ok(())
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}

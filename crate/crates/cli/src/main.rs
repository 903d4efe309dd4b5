use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geg_core::config::objective_name;
use geg_core::data::{format_number, write_backtest, write_baselines, write_search};
use geg_core::search::evaluate_folds;
use geg_core::verify::{run_checks, Perturbation, CHECKS};
use geg_core::{
    backtest, deformed_exp, deformed_log, grid_search, load_config, load_prices, random_search,
    run_baselines, walk_forward_splits, DataFormat, DeformKind, DeformParams, Error, LearningRate,
    PriceSeries, RunConfig, SearchMethod, StrategyConfig,
};

/// Generalized exponentiated gradient toolkit: deformed log/exp tables,
/// portfolio backtests, baselines, hyperparameter search and self-checks.
///
/// Exit codes: 0 success, 1 validation error, 2 runtime or convergence error,
/// 3 I/O error.
#[derive(Debug, Parser)]
#[command(name = "geg", version)]
struct Cli {
    /// Run configuration file (`section.key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir` [default: results].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Random seed; overrides `run.seed` [default: 0].
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print deformed log/exp values and the round-trip residual over a range.
    MathTable(MathTable),
    /// Run the configured strategy and write wealth.csv, weights.csv, summary.txt.
    Backtest(DatasetArg),
    /// Run buy-and-hold, uniform CRP and classical EG; write baselines.csv.
    Baselines(DatasetArg),
    /// Run the configured grid or random search; write ranking.csv.
    Search(DatasetArg),
    /// Run the built-in invariant suite and report each property's max residual.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    General,
    Natural,
    Tsallis,
    Kaniadakis,
    Amari,
    Abe,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    /// Tabulate over x: x, log(x), |exp(log x) - x| / x.
    X,
    /// Tabulate over y: y, exp(y), |log(exp y) - y|.
    Y,
}

#[derive(Debug, Args)]
struct MathTable {
    /// Parameter family; the named families take their own flag.
    #[arg(long, value_enum, default_value_t = Kind::General)]
    kind: Kind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b: f64,
    /// Tsallis q.
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Kaniadakis kappa.
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Amari alpha.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Abe sigma.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Gamma-family gamma.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = Axis::X)]
    axis: Axis,
    /// Range start [default: 0.1 for x, -2 for y].
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Range end, inclusive [default: 10 for x, 2 for y].
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
}

#[derive(Debug, Args)]
struct DatasetArg {
    /// Price CSV; overrides `dataset.path`.
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Corrupt one check's expected values, as `CHECK=AMOUNT`; the report must
    /// then name that check.
    #[arg(long, value_name = "CHECK=AMOUNT")]
    perturb: Option<String>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn math_params(m: &MathTable) -> Result<DeformParams, Error> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage(format!("--kind {:?} needs --{flag}", m.kind)));
    let kind = match m.kind {
        Kind::General => DeformKind::General { a: m.a, b: m.b },
        Kind::Natural => DeformKind::NaturalLog,
        Kind::Tsallis => DeformKind::Tsallis(need(m.q, "q")?),
        Kind::Kaniadakis => DeformKind::Kaniadakis(need(m.kappa, "kappa")?),
        Kind::Amari => DeformKind::Amari(need(m.alpha, "alpha")?),
        Kind::Abe => DeformKind::Abe(need(m.sigma, "sigma")?),
        Kind::Gamma => DeformKind::Gamma(need(m.gamma, "gamma")?),
    };
    Ok(DeformParams::from_kind(kind)?)
}

fn math_table(m: &MathTable) -> Result<(), Error> {
    let p = math_params(m)?;
    let (from, to) = match m.axis {
        Axis::X => (m.from.unwrap_or(0.1), m.to.unwrap_or(10.0)),
        Axis::Y => (m.from.unwrap_or(-2.0), m.to.unwrap_or(2.0)),
    };
    if !(m.step > 0.0) || !from.is_finite() || !to.is_finite() || from > to {
        return Err(usage(format!("invalid range [{from}, {to}] with step {}", m.step)));
    }
    if m.axis == Axis::X && from <= 0.0 {
        return Err(usage(format!("x range must be positive, got start {from}")));
    }
    let count = ((to - from) / m.step + 1e-9).floor() as usize + 1;
    let mut out = String::new();
    match m.axis {
        Axis::X => out.push_str("x,deformed_log,residual\n"),
        Axis::Y => out.push_str("y,deformed_exp,residual\n"),
    }
    for k in 0..count {
        let v = from + k as f64 * m.step;
        let (f, residual) = match m.axis {
            Axis::X => {
                let y = deformed_log(p, v)?;
                (y, (deformed_exp(p, y)? - v).abs() / v)
            }
            Axis::Y => {
                let x = deformed_exp(p, v)?;
                let back = if x > 0.0 && x.is_finite() { (deformed_log(p, x)? - v).abs() } else { f64::NAN };
                (x, back)
            }
        };
        out.push_str(&format!("{},{},{}\n", format_number(v), format_number(f), format_number(residual)));
    }
    print!("{out}");
    Ok(())
}

fn run_config(cli: &Cli, dataset: Option<&Path>) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = dataset {
        cfg.dataset = Some(d.to_path_buf());
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn prices(cfg: &RunConfig) -> Result<PriceSeries, Error> {
    let path = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| usage("no dataset: set dataset.path in --config or pass --dataset"))?;
    Ok(load_prices(path, DataFormat::Csv)?.prices)
}

fn cmd_backtest(cli: &Cli, args: &DatasetArg) -> Result<(), Error> {
    let cfg = run_config(cli, args.dataset.as_deref())?;
    let prices = prices(&cfg)?;
    let result = backtest(&prices, &cfg.strategy, cfg.initial_wealth)?;
    write_backtest(&cfg.output_dir, &prices, &result, &cfg.echo())?;
    let m = &result.metrics;
    println!("periods          {}", result.returns.len());
    println!("final wealth     {}", format_number(m.final_wealth));
    println!("max drawdown     {}", format_number(m.max_drawdown));
    println!("mean log return  {}", format_number(m.mean_log_return));
    println!("results in {}", cfg.output_dir.display());
    Ok(())
}

fn cmd_baselines(cli: &Cli, args: &DatasetArg) -> Result<(), Error> {
    let cfg = run_config(cli, args.dataset.as_deref())?;
    let prices = prices(&cfg)?;
    let runs = run_baselines(&prices, cfg.initial_wealth)?;
    write_baselines(&cfg.output_dir, &runs, &cfg.echo())?;
    for (name, run) in &runs {
        println!("{name:<14} final wealth {}", format_number(run.final_wealth()));
    }
    Ok(())
}

fn cmd_search(cli: &Cli, args: &DatasetArg) -> Result<(), Error> {
    let cfg = run_config(cli, args.dataset.as_deref())?;
    let search = cfg
        .search
        .clone()
        .ok_or_else(|| usage("the config has no search block (set search.method)"))?;
    let prices = prices(&cfg)?;
    let report = match &search.method {
        SearchMethod::Grid(space) => grid_search(space, &cfg.strategy, &prices, &search.split, search.objective)?,
        SearchMethod::Random { space, samples } => {
            random_search(space, &cfg.strategy, &prices, &search.split, search.objective, *samples, cfg.seed)?
        }
    };
    write_search(&cfg.output_dir, &report, &cfg.echo())?;
    println!(
        "{} configurations, {} invalid skipped, {} failed, {} folds",
        report.ranked.len(),
        report.invalid,
        report.failed(),
        report.folds.len()
    );
    // uniform CRP on the same folds: zero learning rate keeps the uniform start
    let folds = walk_forward_splits(prices.n_periods() - 1, &search.split)?;
    let crp = StrategyConfig { lr: LearningRate::scalar(0.0), ..StrategyConfig::default() };
    let crp_score = search.objective.score(&evaluate_folds(&prices, &crp, &folds)?);
    match report.best() {
        Some(best) => {
            println!("best {} = {}", objective_name(search.objective), format_number(best.score.unwrap_or(f64::NAN)));
            for (k, v) in best.config.describe() {
                println!("  {k} = {v}");
            }
        }
        None => println!("every configuration failed"),
    }
    println!("uniform CRP {} = {}", objective_name(search.objective), format_number(crp_score));
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, Error> {
    let perturb = match &args.perturb {
        None => None,
        Some(spec) => {
            let (check, amount) = spec.split_once('=').ok_or_else(|| usage("--perturb expects CHECK=AMOUNT"))?;
            if !CHECKS.contains(&check) {
                return Err(usage(format!("unknown check {check:?}; known: {}", CHECKS.join(", "))));
            }
            let amount = amount.parse().map_err(|_| usage(format!("invalid perturbation amount {amount:?}")))?;
            Some(Perturbation { check: check.to_string(), amount })
        }
    };
    let report = run_checks(perturb);
    for c in &report.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        print!(
            "{status} {:<28} max_residual={:<12} tolerance={} samples={}",
            c.name,
            format!("{:.3e}", c.max_residual),
            format!("{:.0e}", c.tolerance),
            c.samples
        );
        match &c.error {
            Some(e) => println!(" error: {e}"),
            None => println!(),
        }
    }
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    if failed.is_empty() {
        println!("all {} checks passed", report.checks.len());
    } else {
        println!("failed: {}", failed.join(", "));
    }
    Ok(report.passed())
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::MathTable(m) => math_table(m)?,
        Command::Backtest(a) => cmd_backtest(cli, a)?,
        Command::Baselines(a) => cmd_baselines(cli, a)?,
        Command::Search(a) => cmd_search(cli, a)?,
        Command::Verify(v) => {
            if !cmd_verify(v)? {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

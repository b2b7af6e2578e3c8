//! Batch front end: parses a JSON config, dispatches one of the three
//! experiments or the geometry self-check suite, and writes CSV/JSON
//! artifacts plus a manifest into the output directory.
//!
//! Exit codes: 0 success, 1 check failure or runtime error, 2 config error,
//! 3 every ensemble member diverged.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geodev_core::applications::{
    run_duffing_drift_preserving, run_geometric_optimizer, run_trapped_brownian, OptimizerRun,
};
use geodev_core::check::run_all_checks;
use geodev_core::{GeodevError, Result, Scheme};
use serde::Serialize;

use config::{FileConfig, Overrides};
use output::{columns_csv, states_csv, ManifestBuilder};

#[derive(Parser)]
#[command(name = "geodev", version, about = "Manifold-developed SDE experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
    /// Seed override; wins over the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Integration scheme override for the primary run.
    #[arg(long)]
    scheme: Option<Scheme>,
}

#[derive(Args)]
struct CheckArgs {
    /// Optional JSON config; only the `common` block is consulted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Trapped Brownian motion in a sharp potential well.
    Well(RunArgs),
    /// Drift-preserving Duffing integration on the constraint metric.
    Duffing(RunArgs),
    /// Annealed Langevin optimization of the Ackley function.
    Optimize(RunArgs),
    /// Geometry and derivative invariant suite.
    Check(CheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Well(args) => dispatch(args, cmd_well),
        Command::Duffing(args) => dispatch(args, cmd_duffing),
        Command::Optimize(args) => dispatch(args, cmd_optimize),
        Command::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                GeodevError::Config(_) => 2,
                GeodevError::AllDiverged { .. } => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(
    args: &RunArgs,
    run: fn(&RunArgs, FileConfig, &Path) -> Result<()>,
) -> Result<ExitCode> {
    let cfg = FileConfig::load(&args.config)?;
    init_threads(cfg.common.threads)?;
    ensure_out_dir(&args.out)?;
    run(args, cfg, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| GeodevError::Config(format!("cannot create {}: {e}", dir.display())))
}

/// Cap ensemble parallelism: `GEODEV_THREADS` wins over the config's
/// `common.threads`; unset means rayon's default.
fn init_threads(config_threads: Option<usize>) -> Result<()> {
    let from_env = match std::env::var("GEODEV_THREADS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| {
            GeodevError::Config(format!("GEODEV_THREADS must be a positive integer, got `{v}`"))
        })?),
        Err(_) => None,
    };
    if let Some(n) = from_env.or(config_threads) {
        if n == 0 {
            return Err(GeodevError::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| GeodevError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn cmd_well(args: &RunArgs, cfg: FileConfig, out: &Path) -> Result<()> {
    let mut well = cfg.well.clone();
    let over = Overrides { seed: args.seed, scheme: args.scheme };
    if let Some(s) = over.scheme {
        well.sim.scheme = s;
    }
    let seed = over.resolve_seed(well.sim.seed, &cfg.common);
    let result = run_trapped_brownian(&well, seed)?;

    let dim = well.lambda.len();
    let mut manifest = ManifestBuilder::new("well", seed);
    manifest.artifact(out, "well_geometric.csv", &states_csv(&result.geometric, dim))?;
    manifest.artifact(out, "well_euclidean.csv", &states_csv(&result.euclidean, dim))?;
    manifest.artifact_json(out, "well_summary.json", &result.summary)?;
    manifest.diverged("geometric", result.geometric.n_diverged());
    manifest.diverged("euclidean", result.euclidean.n_diverged());
    manifest.finish(out, well)
}

fn cmd_duffing(args: &RunArgs, cfg: FileConfig, out: &Path) -> Result<()> {
    let mut duffing = cfg.duffing.clone();
    let over = Overrides { seed: args.seed, scheme: args.scheme };
    if let Some(s) = over.scheme {
        duffing.sim.scheme = s;
    }
    let seed = over.resolve_seed(duffing.sim.seed, &cfg.common);
    let result = run_duffing_drift_preserving(&duffing, seed)?;

    let s = &result.summary;
    let mut manifest = ManifestBuilder::new("duffing", seed);
    manifest.artifact(out, "duffing_states.csv", &states_csv(&result.geometric, 2))?;
    manifest.artifact(
        out,
        "duffing_energy.csv",
        &columns_csv(
            &["t", "mean_H", "theory_Z", "rmse"],
            &[&s.times, &s.mean_h, &s.theory_z, &s.rmse],
        ),
    )?;
    manifest.artifact(
        out,
        "duffing_euclidean_states.csv",
        &states_csv(&result.euclidean, 2),
    )?;
    manifest.artifact(
        out,
        "duffing_euclidean_energy.csv",
        &columns_csv(&["t", "mean_H"], &[&s.times, &s.euclidean_mean_h]),
    )?;
    manifest.diverged("geometric", s.geometric_diverged);
    manifest.diverged("euclidean", s.euclidean_diverged);
    manifest.finish(out, duffing)
}

/// `iteration,beta,best_f,incumbent_f,f_0..f_{N-1}` rows for one run.
fn optimizer_history_csv(run: &OptimizerRun) -> String {
    use std::fmt::Write as _;
    let members = run.member_f[0].len();
    let mut out = String::from("iteration,beta,best_f,incumbent_f");
    for m in 0..members {
        let _ = write!(out, ",f_{m}");
    }
    out.push('\n');
    for k in 0..run.betas.len() {
        let _ = write!(out, "{k},{},{},{}", run.betas[k], run.ensemble_best[k], run.incumbent[k]);
        for m in 0..members {
            let _ = write!(out, ",{}", run.member_f[k][m]);
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct BestRecord {
    best_point: Vec<f64>,
    best_value: f64,
    iterations: usize,
    singular_events: usize,
    diverged: usize,
}

impl BestRecord {
    fn of(run: &OptimizerRun) -> Self {
        Self {
            best_point: run.best_point.iter().copied().collect(),
            best_value: run.best_value,
            iterations: run.betas.len() - 1,
            singular_events: run.singular_events,
            diverged: run.diverged,
        }
    }
}

#[derive(Serialize)]
struct BestReport {
    geometric: BestRecord,
    euclidean: BestRecord,
}

fn cmd_optimize(args: &RunArgs, cfg: FileConfig, out: &Path) -> Result<()> {
    let mut opt = cfg.optimize.clone();
    let over = Overrides { seed: args.seed, scheme: args.scheme };
    if let Some(s) = over.scheme {
        opt.sim.scheme = s;
    }
    let seed = over.resolve_seed(opt.sim.seed, &cfg.common);
    let result = run_geometric_optimizer(&opt, seed)?;

    let mut manifest = ManifestBuilder::new("optimize", seed);
    manifest.artifact(out, "opt_history.csv", &optimizer_history_csv(&result.geometric))?;
    manifest.artifact(
        out,
        "opt_history_euclidean.csv",
        &optimizer_history_csv(&result.euclidean),
    )?;
    manifest.artifact_json(
        out,
        "opt_best.json",
        &BestReport {
            geometric: BestRecord::of(&result.geometric),
            euclidean: BestRecord::of(&result.euclidean),
        },
    )?;
    manifest.diverged("geometric", result.geometric.diverged);
    manifest.diverged("euclidean", result.euclidean.diverged);
    manifest.finish(out, opt)
}

fn cmd_check(args: &CheckArgs) -> Result<ExitCode> {
    let threads = match &args.config {
        Some(path) => FileConfig::load(path)?.common.threads,
        None => None,
    };
    init_threads(threads)?;
    ensure_out_dir(&args.out)?;
    let report = run_all_checks()?;
    let mut manifest = ManifestBuilder::new("check", 0);
    manifest.artifact_json(&args.out, "check_report.json", &report)?;
    manifest.finish(&args.out, serde_json::json!({}))?;
    for c in &report.checks {
        println!(
            "{}: {} (residual {:e}, tolerance {:e})",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.worst_residual,
            c.tolerance
        );
    }
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: {} check(s) failed", report.checks.iter().filter(|c| !c.passed).count());
        Ok(ExitCode::from(1))
    }
}

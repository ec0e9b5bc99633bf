use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use cliffpde_core::config::{load_config, Command, ExperimentConfig};
use cliffpde_core::report::ExperimentReport;
use cliffpde_core::suites::{run_single, suite_commands};
use cliffpde_core::Error;

/// Verification suites for Clifford-valued Dirac operators on periodic grids.
///
/// Writes a JSON report (schema v1) and CSV side files, and exits with
/// status 1 when any check fails. `CLIFFPDE_THREADS` caps the worker pool.
#[derive(Parser, Debug)]
#[command(name = "cliffpde", version)]
struct Args {
    /// identities, symbols, gauge-solve, lorenz, hodge, nonlinear-hodge,
    /// compensation, kernel or all
    command: String,
    /// `key = value` configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per axis
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Torus dimension for the gauge, Lorenz and Hodge suites
    #[arg(long, value_parser = ["3", "4"])]
    dim: Option<String>,
    /// Report path; defaults to `cliffpde-<command>.json`
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure(args: &Args) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.command = args.command.parse::<Command>()?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.grid_n {
        cfg.n = Some(n);
    }
    if let Some(d) = &args.dim {
        cfg.dim = d.parse().expect("validated by clap");
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads() {
    let Ok(v) = std::env::var("CLIFFPDE_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring CLIFFPDE_THREADS={v:?}: expected a positive integer"),
    }
}

fn run(args: &Args) -> Result<bool, Error> {
    let cfg = configure(args)?;
    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from(format!("cliffpde-{}.json", cfg.command)));
    let start = Instant::now();
    let mut suites = Vec::new();
    for cmd in suite_commands(cfg.command) {
        let t = Instant::now();
        let s = run_single(&cfg, cmd);
        for c in &s.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            eprintln!("{status} {}/{}: {:e} (threshold {:e})", s.suite, c.name, c.measured, c.threshold);
        }
        eprintln!("{} finished in {:.2} s", s.suite, t.elapsed().as_secs_f64());
        suites.push(s);
    }
    let report = ExperimentReport::new(cfg, suites);
    report.write(&out)?;
    eprintln!("report written to {} ({:.2} s total)", out.display(), start.elapsed().as_secs_f64());
    let failed = report.failed_checks();
    if !failed.is_empty() {
        eprintln!("{} failed check(s): {}", failed.len(), failed.join(", "));
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

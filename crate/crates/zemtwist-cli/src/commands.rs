//! CLI verbs: run, compare, montecarlo, validate.

use crate::config::{resolved_file, ScenarioFile};
use crate::output::{
    campaign_coefficients_csv, campaign_runs_csv, campaign_stats_csv, compare_summary_csv,
    trace_csv, RunManifest,
};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::time::Instant;
use zemtwist::control::ControlMode;
use zemtwist::sim::{
    campaign_draws, monte_carlo, run_engagement, ScenarioConfig, TerminationReason, Trace,
};

/// Exit codes: 0 success, 1 configuration error, 2 numerical divergence.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "zemtwist",
    version,
    about = "Planar engagement simulator: ZEM sliding-surface guidance with SMC / TSMC / ATSMC"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one engagement and write its trace.
    Run(RunArgs),
    /// Run all three controllers on identical draws and summarize.
    Compare(CompareArgs),
    /// Paired Monte Carlo campaign over plant uncertainty.
    Montecarlo(MonteCarloArgs),
    /// Parse and validate a scenario, printing the resolved configuration.
    Validate(ValidateArgs),
}

#[derive(clap::Args, Debug)]
pub struct RunArgs {
    /// Scenario file (JSON); defaults apply for missing fields.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Controller mode override: smc, tsmc, or atsmc.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ControlMode>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Integrator step override [s]; bypasses the servo-resolution bound so
    /// coarse-step behavior can be demonstrated.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(clap::Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(clap::Args, Debug)]
pub struct MonteCarloArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Number of Monte Carlo runs.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Campaign seed; defaults to the scenario's uncertainty seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(clap::Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<ControlMode, String> {
    s.parse()
}

/// Parse a scenario path (or take defaults), apply the dt override, and
/// validate.
fn load_scenario(
    path: Option<&Path>,
    dt_override: Option<f64>,
) -> Result<(ScenarioConfig, ScenarioFile), String> {
    let file = match path {
        Some(p) => ScenarioFile::from_path(p).map_err(|e| e.to_string())?,
        None => ScenarioFile::default(),
    };
    let (mut cfg, _) = file.resolve().map_err(|e| e.to_string())?;
    if let Some(dt) = dt_override {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
        if !(dt > 0.0) {
            return Err(format!("--dt must be > 0 (got {dt})"));
        }
        cfg.integrator.dt = dt;
    }
    Ok((cfg, resolved_file(&cfg)))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn trace_exit_code(trace: &Trace) -> i32 {
    if trace.terminal.reason == TerminationReason::Diverged {
        EXIT_DIVERGED
    } else {
        EXIT_OK
    }
}

pub fn cmd_run(args: &RunArgs) -> i32 {
    let (cfg, resolved) = match load_scenario(args.scenario.as_deref(), args.dt) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mode = args.mode.unwrap_or(cfg.mode);
    let started = Instant::now();
    let trace = run_engagement(&cfg, mode);
    let trace_name = format!("trace_{mode}.csv");
    let mut manifest = RunManifest::new(
        "run",
        &[mode.to_string()],
        cfg.uncertainty.seed,
        None,
        resolved,
        vec![trace_name.clone(), "manifest.json".to_string()],
    );
    let hash = manifest.manifest_sha256.clone();
    if let Err(e) = write_file(
        &args.out,
        &trace_name,
        &trace_csv(&trace, mode.as_str(), &hash),
    ) {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    manifest.duration_s = started.elapsed().as_secs_f64();
    if let Err(e) = manifest
        .write(&args.out.join("manifest.json"))
        .map_err(|e| e.to_string())
    {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    println!("mode:               {mode}");
    println!("termination:        {}", trace.terminal.reason.as_str());
    println!("miss distance:      {:.4} m", trace.terminal.miss_distance);
    println!("intercept time:     {:.4} s", trace.terminal.intercept_time);
    println!(
        "max |delta|:        {:.3} deg",
        trace.max_abs_delta().to_degrees()
    );
    println!(
        "terminal |ZEM| max: {:.4} m (final 0.5 s)",
        trace.terminal_zem_overshoot(0.5)
    );
    println!("samples:            {}", trace.samples.len());
    println!(
        "trace:              {}",
        args.out.join(&trace_name).display()
    );
    if trace.max_abs_alpha() >= 0.5 {
        eprintln!(
            "warning: |alpha| reached {:.3} rad; linear aerodynamics are questionable beyond 0.5",
            trace.max_abs_alpha()
        );
    }
    trace_exit_code(&trace)
}

pub fn cmd_compare(args: &CompareArgs) -> i32 {
    let (cfg, resolved) = match load_scenario(args.scenario.as_deref(), args.dt) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let started = Instant::now();
    let modes = ControlMode::ALL;
    let mut outputs: Vec<String> = modes.iter().map(|m| format!("trace_{m}.csv")).collect();
    outputs.push("summary.csv".to_string());
    outputs.push("manifest.json".to_string());
    let mut manifest = RunManifest::new(
        "compare",
        &modes.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        cfg.uncertainty.seed,
        None,
        resolved,
        outputs,
    );
    let hash = manifest.manifest_sha256.clone();

    let traces: Vec<(String, Trace)> = modes
        .iter()
        .map(|&m| (m.to_string(), run_engagement(&cfg, m)))
        .collect();
    for (mode, trace) in &traces {
        if let Err(e) = write_file(
            &args.out,
            &format!("trace_{mode}.csv"),
            &trace_csv(trace, mode, &hash),
        ) {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    }
    let rows: Vec<(String, &Trace)> = traces.iter().map(|(m, t)| (m.clone(), t)).collect();
    let summary = compare_summary_csv(&rows, &hash);
    if let Err(e) = write_file(&args.out, "summary.csv", &summary) {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    manifest.duration_s = started.elapsed().as_secs_f64();
    if let Err(e) = manifest.write(&args.out.join("manifest.json")) {
        eprintln!("cannot write manifest: {e}");
        return EXIT_CONFIG;
    }
    print!("{summary}");
    if traces
        .iter()
        .any(|(_, t)| t.terminal.reason == TerminationReason::Diverged)
    {
        EXIT_DIVERGED
    } else {
        EXIT_OK
    }
}

pub fn cmd_montecarlo(args: &MonteCarloArgs) -> i32 {
    let (cfg, resolved) = match load_scenario(args.scenario.as_deref(), args.dt) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    if args.n == 0 {
        eprintln!("configuration error: --n must be at least 1");
        return EXIT_CONFIG;
    }
    let seed = args.seed.unwrap_or(cfg.uncertainty.seed);
    let started = Instant::now();
    let modes = ControlMode::ALL;
    let mut manifest = RunManifest::new(
        "montecarlo",
        &modes.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        seed,
        Some(args.n),
        resolved,
        vec![
            "runs.csv".to_string(),
            "stats.csv".to_string(),
            "coefficients.csv".to_string(),
            "manifest.json".to_string(),
        ],
    );
    let hash = manifest.manifest_sha256.clone();

    let result = monte_carlo(&cfg, &modes, args.n, seed);
    let draws = campaign_draws(&cfg, args.n, seed);
    for (name, contents) in [
        ("runs.csv", campaign_runs_csv(&result, &hash)),
        ("stats.csv", campaign_stats_csv(&result, &hash)),
        ("coefficients.csv", campaign_coefficients_csv(&draws, &hash)),
    ] {
        if let Err(e) = write_file(&args.out, name, &contents) {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    }
    manifest.duration_s = started.elapsed().as_secs_f64();
    if let Err(e) = manifest.write(&args.out.join("manifest.json")) {
        eprintln!("cannot write manifest: {e}");
        return EXIT_CONFIG;
    }
    for s in &result.stats {
        println!(
            "{}: completed {}/{} mean miss {:.4} m (q95 {:.4} m) mean terminal ZEM overshoot {:.4} m",
            s.mode,
            s.completed,
            args.n,
            s.mean_miss,
            s.q95,
            s.mean_zem_overshoot
        );
    }
    println!("outputs in {}", args.out.display());
    EXIT_OK
}

pub fn cmd_validate(args: &ValidateArgs) -> i32 {
    match load_scenario(args.scenario.as_deref(), None) {
        Ok((_, resolved)) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&resolved).expect("resolved scenario serializes")
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("configuration error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Dispatch a parsed command line and return the process exit code.
pub fn dispatch(cli: &Cli) -> i32 {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Montecarlo(args) => cmd_montecarlo(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

/// Cap the Monte Carlo worker count from the environment before rayon
/// spins up its global pool.
pub fn configure_threads_from_env() {
    if let Ok(value) = std::env::var("ZEMTWIST_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

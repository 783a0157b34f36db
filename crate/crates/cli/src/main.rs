//! `geocloud` command-line driver.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geocloud::controllers::{ControllerId, FitnessWeights};
use geocloud::economics::{kyoto_equilibrium, kyoto_expected_penalty, kyoto_wastage, KyotoParams};
use geocloud::geotemporal::{fit_ses_alpha, mape, parse_trace, ses_forecast, theta_forecast, write_trace};
use geocloud::simulator::{prepare, build_controller, simulate_with, write_result_dir, ScenarioConfig, SimError, Summary};

#[derive(Parser)]
#[command(name = "geocloud", version, about = "Geotemporal energy-aware cloud simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its result directory.
    Simulate(SimulateArgs),
    /// Sweep the GA fitness weights over a grid summing to one.
    Explore(ExploreArgs),
    /// Forecast a trace with SES or Theta.
    Forecast(ForecastArgs),
    /// Wastage-penalty balance point.
    Kyoto(KyotoArgs),
}

#[derive(Args)]
struct RunManifest {
    /// Scenario JSON.
    #[arg(long)]
    config: PathBuf,
    /// Result directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Replaces every named seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    controller: Option<ControllerId>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    manifest: RunManifest,
}

#[derive(Args)]
struct ExploreArgs {
    #[command(flatten)]
    manifest: RunManifest,
    /// Grid step of each weight.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Parallel runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ses,
    Theta,
}

#[derive(Args)]
struct ForecastArgs {
    /// Trace CSV (timestamp,value).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Smoothing factor; fitted on the training part when absent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Steps to forecast when no holdout is given.
    #[arg(long, default_value_t = 24)]
    horizon: usize,
    /// Trailing samples held out; the forecast covers them and MAPE is printed.
    #[arg(long, default_value_t = 0)]
    holdout: usize,
    /// Standard deviation of the Theta drift.
    #[arg(long, default_value_t = 0.0)]
    drift_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KyotoArgs {
    #[arg(long)]
    c_en: f64,
    #[arg(long, default_value_t = 0.0)]
    c_co2: f64,
    #[arg(long)]
    c_viol: f64,
    #[arg(long)]
    r_agreed: f64,
    #[arg(long)]
    mean_demand: f64,
    #[arg(long)]
    max_demand: f64,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn classify(e: SimError) -> Failure {
    match e {
        SimError::Config(_) | SimError::Geo(geocloud::geotemporal::GeoError::Io { .. }) => usage(e),
        other => runtime(other),
    }
}

fn load_config(m: &RunManifest) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(&m.config)
        .with_context(|| format!("cannot read config {}", m.config.display()))
        .map_err(usage)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let mut config: ScenarioConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| usage(anyhow!("config {}: at {}: {}", m.config.display(), e.path(), e.inner())))?;
    let base = m.config.parent().unwrap_or(Path::new("."));
    config.resolve_paths(base);
    if let Some(seed) = m.seed {
        config.override_seed(seed);
    }
    if let Some(id) = m.controller {
        config.controller.id = id;
    }
    Ok(config)
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let config = load_config(&args.manifest)?;
    let scenario = prepare(&config).map_err(classify)?;
    let mut controller = build_controller(&scenario).map_err(classify)?;
    let result = simulate_with(&scenario, controller.as_mut()).map_err(classify)?;
    write_result_dir(&result, &args.manifest.out).map_err(runtime)?;
    let r = &result.cost_report;
    println!(
        "controller={} it_energy={:.3}kWh it_cost=${:.4} total_energy={:.3}kWh total_cost=${:.4} migrations={} revenue=${:.4} net=${:.4}",
        result.meta.controller,
        r.it_energy,
        r.it_cost,
        r.total_energy,
        r.total_cost,
        result.migrations.len(),
        r.service_revenue,
        r.net_cost()
    );
    Ok(())
}

/// Integer 4-tuples summing to `units`, in lexicographic order.
fn weight_grid(units: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..=units {
        for b in 0..=units - a {
            for c in 0..=units - a - b {
                out.push([a, b, c, units - a - b - c]);
            }
        }
    }
    out
}

fn cmd_explore(args: &ExploreArgs) -> CmdResult {
    let step = args.step;
    let units = (1.0 / step).round();
    if !(step > 0.0 && step <= 1.0) || (units * step - 1.0).abs() > 1e-9 {
        return Err(usage(anyhow!("--step {step} gives an empty weight grid; it must divide 1")));
    }
    if args.jobs == 0 {
        return Err(usage(anyhow!("--jobs must be at least 1")));
    }
    let mut config = load_config(&args.manifest)?;
    if config.controller.id != ControllerId::GaHybrid {
        log::info!("explore sweeps GA weights; running ga_hybrid instead of {}", config.controller.id);
        config.controller.id = ControllerId::GaHybrid;
    }
    prepare(&config).map_err(classify)?;
    let grid = weight_grid(units as usize);
    log::info!("exploring {} weight combinations", grid.len());
    println!("combinations={}", grid.len());

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().map_err(runtime)?;
    let rows: Vec<Result<Row, SimError>> = pool.install(|| {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|w| {
                let mut cfg = config.clone();
                let f = |i: usize| w[i] as f64 * step;
                cfg.controller.weights = FitnessWeights { w_ct: f(0), w_q: f(1), w_up: f(2), w_cd: f(3), ..cfg.controller.weights };
                run_row(&cfg)
            })
            .collect()
    });

    fs::create_dir_all(&args.manifest.out).map_err(runtime)?;
    let path = args.manifest.out.join("exploration.csv");
    let mut w = csv::Writer::from_path(&path).map_err(runtime)?;
    w.write_record(["w_ct", "w_q", "w_up", "w_cd", "total_cost", "service_revenue", "net_cost", "migrations", "violations", "error"])
        .map_err(runtime)?;
    let mut failed = 0;
    for (row, weights) in rows.into_iter().zip(&grid) {
        let ws: Vec<String> = weights.iter().map(|u| format!("{:.4}", *u as f64 * step)).collect();
        let rec = match row {
            Ok(r) => [
                r.total_cost.to_string(),
                r.revenue.to_string(),
                r.net_cost.to_string(),
                r.migrations.to_string(),
                r.violations.to_string(),
                String::new(),
            ],
            Err(e) => {
                failed += 1;
                let step = e.step().map(|s| s.to_string()).unwrap_or_default();
                log::error!("weights {ws:?} failed at step {step}: {e}");
                [String::new(), String::new(), String::new(), String::new(), String::new(), e.to_string()]
            }
        };
        w.write_record(ws.iter().cloned().chain(rec)).map_err(runtime)?;
    }
    w.flush().map_err(runtime)?;
    if failed > 0 {
        return Err(runtime(anyhow!("{failed} of {} runs failed; see {}", grid.len(), path.display())));
    }
    Ok(())
}

struct Row {
    total_cost: f64,
    revenue: f64,
    net_cost: f64,
    migrations: usize,
    violations: usize,
}

fn run_row(cfg: &ScenarioConfig) -> Result<Row, SimError> {
    let scenario = prepare(cfg)?;
    let mut controller = build_controller(&scenario)?;
    let result = simulate_with(&scenario, controller.as_mut())?;
    let summary = Summary::of(&result)?;
    Ok(Row {
        total_cost: result.cost_report.total_cost,
        revenue: result.cost_report.service_revenue,
        net_cost: result.cost_report.net_cost(),
        migrations: summary.migrations,
        violations: result.steps.iter().map(|s| s.unallocated + s.overloaded).sum(),
    })
}

fn cmd_forecast(args: &ForecastArgs) -> CmdResult {
    let file = fs::File::open(&args.input)
        .with_context(|| format!("cannot read trace {}", args.input.display()))
        .map_err(usage)?;
    let series = parse_trace(file, &args.input.display().to_string()).map_err(usage)?;
    if args.holdout >= series.len() {
        return Err(usage(anyhow!("--holdout {} leaves no training data ({} samples)", args.holdout, series.len())));
    }
    let train = series.slice(0, series.len() - args.holdout);
    let horizon = if args.holdout > 0 { args.holdout } else { args.horizon };
    let alpha = match args.alpha {
        Some(a) => a,
        None => fit_ses_alpha(&train).map_err(usage)?,
    };
    let forecast = match args.method {
        Method::Ses => ses_forecast(&train, alpha, horizon),
        Method::Theta => theta_forecast(&train, alpha, args.drift_sigma, args.seed, horizon),
    }
    .map_err(usage)?;
    match &args.out {
        Some(p) => {
            let f = fs::File::create(p).with_context(|| format!("cannot write {}", p.display())).map_err(runtime)?;
            write_trace(&forecast, f).map_err(runtime)?;
        }
        None => write_trace(&forecast, io::stdout().lock()).map_err(runtime)?,
    }
    if args.holdout > 0 {
        let actual = series.slice(series.len() - args.holdout, args.holdout);
        let m = mape(&actual, &forecast).map_err(runtime)?;
        eprintln!("alpha={alpha} mape={:.4}%", m * 100.0);
    }
    Ok(())
}

fn cmd_kyoto(args: &KyotoArgs) -> CmdResult {
    let p = KyotoParams {
        c_en: args.c_en,
        c_co2: args.c_co2,
        c_viol: args.c_viol,
        r_agreed: args.r_agreed,
        mean_demand: args.mean_demand,
        max_demand: args.max_demand,
    };
    let r = kyoto_equilibrium(&p).map_err(usage)?;
    let wastage = kyoto_wastage(&p, r).map_err(runtime)?;
    let penalty = kyoto_expected_penalty(&p, r).map_err(runtime)?;
    let mut out = io::stdout().lock();
    writeln!(out, "r_star={r}").map_err(runtime)?;
    writeln!(out, "wastage={wastage}").map_err(runtime)?;
    writeln!(out, "expected_penalty={penalty}").map_err(runtime)?;
    writeln!(out, "residual={}", (wastage - penalty).abs()).map_err(runtime)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GEOCLOUD_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Explore(a) => cmd_explore(a),
        Command::Forecast(a) => cmd_forecast(a),
        Command::Kyoto(a) => cmd_kyoto(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

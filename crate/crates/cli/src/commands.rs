//! Subcommand implementations.

use std::io::Write;
use std::path::Path as FsPath;

use serde::Serialize;
use stable_em::{
    simulate_path, strong_error_experiment, ErrorTable, ModelParams, Path, PositivityAudit,
    PositivityReport, RngStream, StableLaw, TimeGrid,
};

use crate::args::{CheckParamsArgs, Cli, Command, ConvergenceArgs, SampleArgs, SimulateArgs};
use crate::config::{load_config, ExperimentConfig};
use crate::output::{alpha_label, emit_csv, ensure_dir, write_gnuplot_script, write_loglog};
use crate::CliError;

/// Half-width of the band around `1/alpha` accepted by `--check`.
pub const SLOPE_TOLERANCE: f64 = 0.2;

pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::CheckParams(a) => check_params(&a, out),
        Command::Sample(a) => sample(&a),
        Command::Simulate(a) => simulate(&a, out),
        Command::Convergence(a) => convergence(&a, out),
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

pub fn check_params(args: &CheckParamsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (mu, lambda, kappa, x0) = args.model.resolve().map_err(CliError::Config)?;
    let params = ModelParams::new(mu, lambda, kappa, x0, args.alpha);
    let report = params.validate();
    let mut text = format!(
        "alpha = {}  mu = {mu}  lambda = {lambda}  kappa = {kappa}  x0 = {x0}\n\
         C_alpha    = {}\n\
         threshold  = {}\n\
         delta_max  = {}\n\
         jump_floor = {}\n",
        args.alpha, report.c_alpha, report.threshold, report.delta_max, report.jump_floor
    );
    for (condition, ok) in &report.checks {
        let mark = if *ok { "PASS" } else { "FAIL" };
        text.push_str(&format!("{mark}  {condition}\n"));
    }
    let window = args.delta.map(|d| params.check_step(d));
    if let (Some(d), Some(w)) = (args.delta, &window) {
        let mark = if w.is_ok() { "PASS" } else { "FAIL" };
        text.push_str(&format!("{mark}  0 < delta = {d} < delta_max\n"));
    }
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    report.into_result()?;
    if let Some(w) = window {
        w?;
    }
    Ok(())
}

pub fn sample(args: &SampleArgs) -> Result<(), CliError> {
    let law = StableLaw::new(args.alpha, args.beta, args.sigma)?;
    let mut rng = RngStream::new(args.seed, 0);
    let values = (0..args.n).map(|i| (i, law.sample(&mut rng)));
    emit_csv(&args.out, &["index", "value"], values)
}

/// `paths` trajectories on a grid of step `delta`; trajectory `i` draws from stream `i`.
pub fn simulate_paths(
    params: &ModelParams,
    law: &StableLaw,
    delta: f64,
    horizon: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<Path>, CliError> {
    params.validated()?;
    let grid = TimeGrid::for_model(delta, horizon, params)?;
    (0..paths)
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u64);
            let increments = (0..grid.n_steps())
                .map(|_| law.sample_increment(delta, &mut rng))
                .collect::<stable_em::Result<Vec<_>>>()?;
            Ok(simulate_path(params, &grid, &increments)?)
        })
        .collect()
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (mu, lambda, kappa, x0) = args.model.resolve().map_err(CliError::Config)?;
    let params = ModelParams::new(mu, lambda, kappa, x0, args.alpha);
    let law = StableLaw::new(args.alpha, args.beta, 1.0)?;
    let paths = simulate_paths(&params, &law, args.delta, args.horizon, args.paths, args.seed)?;
    let rows = paths.iter().enumerate().flat_map(|(i, p)| {
        p.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (i, k, p.grid.time(k), v))
    });
    emit_csv(&args.out, &["trajectory", "step", "time", "value"], rows)?;
    let mut audit = PositivityAudit::new();
    for p in &paths {
        audit.observe(p);
    }
    let summary = positivity_summary(audit.report());
    writeln!(out, "{summary}").map_err(stdout_err)?;
    Ok(())
}

pub fn positivity_summary(r: &PositivityReport) -> String {
    let mut s = format!(
        "positivity: {} grid values checked, {} below delta, minimum {}",
        r.values_checked, r.violations, r.min_value
    );
    for t in &r.truncation {
        s.push_str(&format!(
            "\ntruncation at delta {}: {} of {} steps ({})",
            t.delta,
            t.truncations,
            t.steps,
            t.frequency()
        ));
    }
    s
}

#[derive(Debug, Serialize)]
struct SlopeRow {
    alpha: f64,
    slope: f64,
    stderr: f64,
    target: f64,
}

/// Run the strong-error experiment for every alpha of `config`, in order.
pub fn run_convergence(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<ErrorTable>, CliError> {
    let work = || {
        config
            .alphas
            .iter()
            .map(|&alpha| Ok(strong_error_experiment(&config.experiment(alpha)?)?))
            .collect::<Result<Vec<_>, CliError>>()
    };
    match threads {
        None => work(),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(work),
    }
}

/// Write every artifact of a convergence run into `config.out`.
pub fn write_convergence(config: &ExperimentConfig, tables: &[ErrorTable]) -> Result<(), CliError> {
    let dir = config.out.as_path();
    ensure_dir(dir)?;
    let mut slopes = Vec::with_capacity(tables.len());
    for t in tables {
        let label = alpha_label(t.alpha);
        let rows = t
            .deltas
            .iter()
            .zip(&t.errors)
            .zip(&t.standard_errors)
            .map(|((d, e), s)| (d, e, s));
        emit_csv(&dir.join(format!("errors_alpha_{label}.csv")), &["delta", "error", "stderr"], rows)?;
        let trunc = t.deltas.iter().zip(&t.truncation_frequencies);
        emit_csv(&dir.join(format!("truncation_alpha_{label}.csv")), &["delta", "frequency"], trunc)?;
        let data = format!("loglog_alpha_{label}.dat");
        write_loglog(&dir.join(&data), t)?;
        write_gnuplot_script(&dir.join(format!("plot_alpha_{label}.gp")), &data, t.alpha)?;
        let (slope, stderr) = t.fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.stderr));
        slopes.push(SlopeRow {
            alpha: t.alpha,
            slope,
            stderr,
            target: t.q / t.alpha,
        });
    }
    emit_csv(&dir.join("slopes.csv"), &["alpha", "slope", "stderr", "target"], slopes)?;
    write_text(&dir.join("config.toml"), &config.to_toml())
}

fn write_text(path: &FsPath, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Alphas whose fitted slope misses `q/alpha +- SLOPE_TOLERANCE`.
pub fn slope_failures(tables: &[ErrorTable]) -> Vec<f64> {
    tables
        .iter()
        .filter(|t| {
            let target = t.q / t.alpha;
            !t.fit
                .is_some_and(|f| (f.slope - target).abs() <= SLOPE_TOLERANCE)
        })
        .map(|t| t.alpha)
        .collect()
}

pub fn convergence(args: &ConvergenceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref(), args.layer())?;
    let tables = run_convergence(&config, args.threads)?;
    write_convergence(&config, &tables)?;
    let mut text = String::new();
    for t in &tables {
        let fit = t.fit.map_or("slope n/a".to_string(), |f| {
            format!("slope {:.4} +- {:.4}", f.slope, f.stderr)
        });
        text.push_str(&format!(
            "alpha {}: {fit} (target {:.4}), {} trajectories, {} excluded\n",
            t.alpha,
            t.q / t.alpha,
            t.m_trajectories,
            t.excluded
        ));
    }
    text.push_str(&format!("wrote {}\n", config.out.display()));
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    if args.check {
        let failed = slope_failures(&tables);
        if !failed.is_empty() {
            return Err(CliError::Check(format!(
                "fitted slope outside 1/alpha +- {SLOPE_TOLERANCE} for alpha {failed:?}"
            )));
        }
    }
    Ok(())
}

//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigLayer, Preset};
use stable_em::ErrorFunctional;

#[derive(Debug, Parser)]
#[command(
    name = "stable-em",
    version,
    about = "Positivity-preserving Euler-Maruyama simulation of a stable-driven volatility model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the model constants and which parameter conditions hold.
    CheckParams(CheckParamsArgs),
    /// Draw variates from a stable law.
    Sample(SampleArgs),
    /// Simulate trajectories of the scheme.
    Simulate(SimulateArgs),
    /// Estimate strong errors over step sizes and fit the convergence order.
    Convergence(ConvergenceArgs),
}

/// Parse a real written either as a decimal or as `base^exponent`, e.g. `2^-10`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base
                .trim()
                .parse()
                .map_err(|_| format!("invalid base in `{s}`"))?;
            let exp: i32 = exp
                .trim()
                .parse()
                .map_err(|_| format!("invalid integer exponent in `{s}`"))?;
            base.powi(exp)
        }
        None => s.parse().map_err(|_| format!("invalid number `{s}`"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Model coefficients shared by several subcommands.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Parameter set (mu, lambda, kappa) from a reference example.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Drift level mu (> 1).
    #[arg(long, value_parser = parse_real)]
    pub mu: Option<f64>,
    /// Mean-reversion rate lambda (> 0).
    #[arg(long, value_parser = parse_real)]
    pub lambda: Option<f64>,
    /// Noise coefficient kappa, in (0, 1).
    #[arg(long, value_parser = parse_real)]
    pub kappa: Option<f64>,
    /// Initial value x0 (> 0) [default: 1].
    #[arg(long, value_parser = parse_real)]
    pub x0: Option<f64>,
}

impl ModelArgs {
    pub fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            preset: self.preset,
            mu: self.mu,
            lambda: self.lambda,
            kappa: self.kappa,
            x0: self.x0,
            ..ConfigLayer::default()
        }
    }

    /// `(mu, lambda, kappa, x0)`, flags taking precedence over the preset.
    pub fn resolve(&self) -> Result<(f64, f64, f64, f64), String> {
        let base = self.preset.map(Preset::coefficients);
        let pick = |flag: Option<f64>, preset: Option<f64>, name: &str| {
            flag.or(preset)
                .ok_or_else(|| format!("missing --{name} (or pass --preset)"))
        };
        Ok((
            pick(self.mu, base.map(|b| b.0), "mu")?,
            pick(self.lambda, base.map(|b| b.1), "lambda")?,
            pick(self.kappa, base.map(|b| b.2), "kappa")?,
            self.x0.unwrap_or(1.0),
        ))
    }
}

#[derive(Debug, Args)]
pub struct CheckParamsArgs {
    /// Stability index, in (1, 2).
    #[arg(long, value_parser = parse_real)]
    pub alpha: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also check that this step size lies in the admissible window.
    #[arg(long, value_parser = parse_real)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Stability index, in (1, 2).
    #[arg(long, value_parser = parse_real)]
    pub alpha: f64,
    /// Skewness, in [-1, 1].
    #[arg(long, default_value_t = 0.0, value_parser = parse_real, allow_negative_numbers = true)]
    pub beta: f64,
    /// Scale (> 0).
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    pub sigma: f64,
    /// Number of draws.
    #[arg(long)]
    pub n: usize,
    /// Master seed.
    #[arg(long, default_value_t = crate::config::DEFAULT_SEED)]
    pub seed: u64,
    /// Output CSV file (`index,value`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Stability index, in (1, 2).
    #[arg(long, value_parser = parse_real)]
    pub alpha: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Noise skewness, in [-1, 1].
    #[arg(long, default_value_t = 0.0, value_parser = parse_real, allow_negative_numbers = true)]
    pub beta: f64,
    /// Step size.
    #[arg(long, value_parser = parse_real)]
    pub delta: f64,
    /// Terminal time T.
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    pub horizon: f64,
    /// Number of trajectories.
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    /// Master seed; trajectory i uses stream i.
    #[arg(long, default_value_t = crate::config::DEFAULT_SEED)]
    pub seed: u64,
    /// Output CSV file (`trajectory,step,time,value`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated stability indices [preset: 1.8,1.6,1.4,1.1].
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub alpha: Option<Vec<f64>>,
    /// Noise skewness [default: 0].
    #[arg(long, value_parser = parse_real, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Comma-separated coarse step sizes, e.g. `2^-9,2^-10` [default: 2^-9..2^-13].
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub deltas: Option<Vec<f64>>,
    /// Reference step size [default: 2^-15].
    #[arg(long = "ref", value_parser = parse_real)]
    pub delta_ref: Option<f64>,
    /// Terminal time T [default: 1].
    #[arg(long, value_parser = parse_real)]
    pub horizon: Option<f64>,
    /// Error moment order, in [1, alpha) [default: 1].
    #[arg(long, value_parser = parse_real)]
    pub q: Option<f64>,
    /// Trajectories [default: 500, or 1000 with --paper-scale].
    #[arg(long)]
    pub m: Option<usize>,
    /// Master seed [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: results].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use steps 2^-10..2^-14, reference 2^-16 and m = 1000.
    #[arg(long)]
    pub paper_scale: bool,
    /// Measure the maximum error over the coarse grid instead of at T.
    #[arg(long)]
    pub sup: bool,
    /// Worker threads [default: all cores]. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exit with code 3 unless every fitted slope lies within 1/alpha +- 0.2.
    #[arg(long)]
    pub check: bool,
}

impl ConvergenceArgs {
    pub fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            alphas: self.alpha.clone(),
            beta: self.beta,
            deltas: self.deltas.clone(),
            delta_ref: self.delta_ref,
            horizon: self.horizon,
            q: self.q,
            m: self.m,
            seed: self.seed,
            out: self.out.clone(),
            functional: self.sup.then_some(ErrorFunctional::SupOverGrid),
            paper_scale: self.paper_scale.then_some(true),
            ..self.model.layer()
        }
    }
}

//! Experiment configuration.
//!
//! Values resolve in order: command-line flags, then the TOML config file,
//! then a `--preset`, then the scale defaults. Every key a file may contain:
//!
//! | key          | meaning                                   | default            |
//! |--------------|-------------------------------------------|--------------------|
//! | `preset`     | `table1`, `table2` or `table3`            | none               |
//! | `mu`         | drift level                               | required           |
//! | `lambda`     | mean-reversion rate                       | required           |
//! | `kappa`      | volatility of volatility                  | required           |
//! | `x0`         | initial value                             | 1                  |
//! | `alphas`     | stability indices                         | required           |
//! | `beta`       | noise skewness                            | 0                  |
//! | `deltas`     | coarse step sizes (dyadic)                | 2^-9 .. 2^-13      |
//! | `delta_ref`  | reference step size                       | 2^-15              |
//! | `horizon`    | terminal time T                           | 1                  |
//! | `q`          | error moment order                        | 1                  |
//! | `m`          | trajectories                              | 500                |
//! | `seed`       | master seed                               | 1                  |
//! | `out`        | output directory                          | `results`          |
//! | `functional` | `terminal` or `sup-over-grid`             | `terminal`         |
//! | `paper_scale`| use 2^-10..2^-14, ref 2^-16, m = 1000     | false              |

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stable_em::{ErrorFunctional, ExperimentSpec, ModelParams, StableLaw};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_M: usize = 500;
pub const PAPER_M: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Table1,
    Table2,
    Table3,
}

impl Preset {
    /// `(mu, lambda, kappa)`.
    pub fn coefficients(self) -> (f64, f64, f64) {
        match self {
            Preset::Table1 => (1.5, 2.0, 0.5),
            Preset::Table2 => (2.0, 3.0, 0.5),
            Preset::Table3 => (2.0, 3.0, 0.2),
        }
    }

    pub fn alphas() -> Vec<f64> {
        vec![1.8, 1.6, 1.4, 1.1]
    }

    /// The preset as a partial config: model, alphas and the large-scale grid.
    pub fn layer(self) -> ConfigLayer {
        let (mu, lambda, kappa) = self.coefficients();
        let (deltas, delta_ref) = grid(true);
        ConfigLayer {
            mu: Some(mu),
            lambda: Some(lambda),
            kappa: Some(kappa),
            x0: Some(1.0),
            alphas: Some(Self::alphas()),
            deltas: Some(deltas),
            delta_ref: Some(delta_ref),
            m: Some(PAPER_M),
            ..ConfigLayer::default()
        }
    }
}

/// Default coarse steps and reference step for the desk or large scale.
pub fn grid(paper_scale: bool) -> (Vec<f64>, f64) {
    if paper_scale {
        ((10..=14).map(|k| 2f64.powi(-k)).collect(), 2f64.powi(-16))
    } else {
        ((9..=13).map(|k| 2f64.powi(-k)).collect(), 2f64.powi(-15))
    }
}

/// A partially specified configuration: one config file or one set of flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub preset: Option<Preset>,
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub x0: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub delta_ref: Option<f64>,
    pub horizon: Option<f64>,
    pub q: Option<f64>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub functional: Option<ErrorFunctional>,
    pub paper_scale: Option<bool>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),*) => {
        ConfigLayer { $($field: $top.$field.or($base.$field)),* }
    };
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: ConfigLayer) -> ConfigLayer {
        overlay!(
            self, base, preset, mu, lambda, kappa, x0, alphas, beta, deltas, delta_ref, horizon,
            q, m, seed, out, functional, paper_scale
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub x0: f64,
    pub alphas: Vec<f64>,
    pub beta: f64,
    pub deltas: Vec<f64>,
    pub delta_ref: f64,
    pub horizon: f64,
    pub q: f64,
    pub m: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub functional: ErrorFunctional,
}

fn required<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Config(format!(
            "missing required value `{key}` (pass --{} or set it in the config file or via --preset)",
            key.replace('_', "-")
        ))
    })
}

/// Merge `flags` over an optional config file and resolve defaults.
pub fn load_config(file: Option<&Path>, flags: ConfigLayer) -> Result<ExperimentConfig, CliError> {
    let file_layer = match file {
        Some(p) => ConfigLayer::read(p)?,
        None => ConfigLayer::default(),
    };
    resolve(flags.over(file_layer))
}

/// Fill in preset and default values, then validate.
pub fn resolve(layer: ConfigLayer) -> Result<ExperimentConfig, CliError> {
    let layer = match layer.preset {
        Some(p) => layer.over(p.layer()),
        None => layer,
    };
    let paper_scale = layer.paper_scale.unwrap_or(false);
    let (deltas, delta_ref) = grid(paper_scale);
    let config = ExperimentConfig {
        mu: required(layer.mu, "mu")?,
        lambda: required(layer.lambda, "lambda")?,
        kappa: required(layer.kappa, "kappa")?,
        x0: layer.x0.unwrap_or(1.0),
        alphas: required(layer.alphas, "alpha")?,
        beta: layer.beta.unwrap_or(0.0),
        deltas: layer.deltas.unwrap_or(deltas),
        delta_ref: layer.delta_ref.unwrap_or(delta_ref),
        horizon: layer.horizon.unwrap_or(1.0),
        q: layer.q.unwrap_or(1.0),
        m: layer
            .m
            .unwrap_or(if paper_scale { PAPER_M } else { DEFAULT_M }),
        seed: layer.seed.unwrap_or(DEFAULT_SEED),
        out: layer.out.unwrap_or_else(|| PathBuf::from("results")),
        functional: layer.functional.unwrap_or_default(),
    };
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn model(&self, alpha: f64) -> ModelParams {
        ModelParams::new(self.mu, self.lambda, self.kappa, self.x0, alpha)
    }

    pub fn law(&self, alpha: f64) -> Result<StableLaw, CliError> {
        Ok(StableLaw::new(alpha, self.beta, 1.0)?)
    }

    pub fn experiment(&self, alpha: f64) -> Result<ExperimentSpec, CliError> {
        Ok(ExperimentSpec {
            params: self.model(alpha),
            law: self.law(alpha)?,
            deltas: self.deltas.clone(),
            delta_ref: self.delta_ref,
            horizon: self.horizon,
            q: self.q,
            m: self.m,
            master_seed: self.seed,
            functional: self.functional,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.alphas.is_empty() {
            return Err(CliError::Config("at least one alpha is required".into()));
        }
        // TOML integers are signed 64-bit.
        if self.seed > i64::MAX as u64 {
            return Err(CliError::Config(format!(
                "seed {} exceeds the largest storable seed {}",
                self.seed,
                i64::MAX
            )));
        }
        for &alpha in &self.alphas {
            self.model(alpha).validated()?;
            self.experiment(alpha)?.validate()?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

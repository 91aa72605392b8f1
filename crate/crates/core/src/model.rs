//! Model parameters for
//!
//! ```text
//! dx(t) = (mu - lambda x(t)) dt + kappa x(t-) dL(t),   x(0) = x0,
//! ```
//!
//! where `L` is a strictly alpha-stable process with Levy measure
//! `nu(dz) = C_alpha |z|^(-alpha-1) dz`, and the checks that make the
//! positivity-preserving scheme well posed.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// `C_alpha = alpha 2^(alpha-1) Gamma((alpha+1)/2) / (sqrt(pi) Gamma(1 - alpha/2))`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "C_alpha requires 1 < alpha < 2, got alpha = {alpha}"
        )));
    }
    let num = alpha * 2f64.powf(alpha - 1.0) * gamma((alpha + 1.0) / 2.0);
    let den = PI.sqrt() * gamma(1.0 - alpha / 2.0);
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub x0: f64,
    pub alpha: f64,
}

/// One inequality of the standing assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    AlphaInRange,
    MuAboveOne,
    LambdaPositive,
    KappaInUnitInterval,
    X0Positive,
    LambdaAboveThreshold,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::AlphaInRange,
        Condition::MuAboveOne,
        Condition::LambdaPositive,
        Condition::KappaInUnitInterval,
        Condition::X0Positive,
        Condition::LambdaAboveThreshold,
    ];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::AlphaInRange => "1 < α < 2",
            Condition::MuAboveOne => "μ > 1",
            Condition::LambdaPositive => "λ > 0",
            Condition::KappaInUnitInterval => "0 < κ < 1",
            Condition::X0Positive => "x0 > 0",
            Condition::LambdaAboveThreshold => "λ > 2κ^0.5·C_α/(2α−1)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// NaN when alpha is out of range.
    pub c_alpha: f64,
    /// `2 kappa^0.5 C_alpha / (2 alpha - 1)`.
    pub threshold: f64,
    /// Upper end of the admissible step window, `min((mu-1)/lambda, 1/lambda)`.
    pub delta_max: f64,
    /// Lower bound `-1/kappa` on negative jump sizes. Reported only; sampled
    /// increments are never truncated.
    pub jump_floor: f64,
    pub checks: Vec<(Condition, bool)>,
}

impl AssumptionReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|&(_, ok)| ok)
    }

    pub fn failed(&self) -> Vec<Condition> {
        self.checks
            .iter()
            .filter(|&&(_, ok)| !ok)
            .map(|&(c, _)| c)
            .collect()
    }

    pub fn holds(&self, condition: Condition) -> bool {
        self.checks
            .iter()
            .find(|&&(c, _)| c == condition)
            .is_some_and(|&(_, ok)| ok)
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passes() {
            Ok(self)
        } else {
            Err(Error::AssumptionViolated {
                failed: self.failed(),
                c_alpha: self.c_alpha,
                threshold: self.threshold,
            })
        }
    }
}

impl ModelParams {
    pub fn new(mu: f64, lambda: f64, kappa: f64, x0: f64, alpha: f64) -> Self {
        Self {
            mu,
            lambda,
            kappa,
            x0,
            alpha,
        }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    /// Fixed point `mu / lambda` of the deterministic drift.
    pub fn mean_reversion_level(&self) -> f64 {
        self.mu / self.lambda
    }

    pub fn delta_max(&self) -> f64 {
        ((self.mu - 1.0) / self.lambda).min(1.0 / self.lambda)
    }

    pub fn validate(&self) -> AssumptionReport {
        let c = c_alpha(self.alpha).unwrap_or(f64::NAN);
        let threshold = 2.0 * self.kappa.sqrt() * c / (2.0 * self.alpha - 1.0);
        let alpha_ok = self.alpha > 1.0 && self.alpha < 2.0;
        let checks = vec![
            (Condition::AlphaInRange, alpha_ok),
            (Condition::MuAboveOne, self.mu > 1.0),
            (Condition::LambdaPositive, self.lambda > 0.0),
            (
                Condition::KappaInUnitInterval,
                self.kappa > 0.0 && self.kappa < 1.0,
            ),
            (Condition::X0Positive, self.x0 > 0.0),
            // NaN compares false, so an invalid alpha also fails here.
            (Condition::LambdaAboveThreshold, self.lambda > threshold),
        ];
        AssumptionReport {
            c_alpha: c,
            threshold,
            delta_max: self.delta_max(),
            jump_floor: -1.0 / self.kappa,
            checks,
        }
    }

    /// Fails with [`Error::AssumptionViolated`] unless every condition holds.
    pub fn validated(self) -> Result<Self> {
        self.validate().into_result().map(|_| self)
    }

    /// Checks that `delta` lies in the open window `(0, delta_max)`.
    pub fn check_step(&self, delta: f64) -> Result<()> {
        let delta_max = self.delta_max();
        if delta > 0.0 && delta < delta_max {
            Ok(())
        } else {
            Err(Error::StepOutsideWindow { delta, delta_max })
        }
    }
}

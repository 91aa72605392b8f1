//! Strictly alpha-stable variates via the Chambers-Mallows-Stuck transform.
//!
//! `S_alpha(sigma, beta, 0)` has characteristic function
//!
//! ```text
//! phi(u) = exp(-sigma^alpha |u|^alpha (1 - i beta sgn(u) tan(pi alpha / 2)))
//! ```
//!
//! Only the regime `1 < alpha < 2` is supported.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters `(alpha, beta, sigma)` of a strictly stable law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLaw", into = "RawLaw")]
pub struct StableLaw {
    alpha: f64,
    beta: f64,
    sigma: f64,
    // CMS constants, fixed by (alpha, beta).
    shift: f64,
    factor: f64,
}

#[derive(Serialize, Deserialize)]
struct RawLaw {
    alpha: f64,
    beta: f64,
    sigma: f64,
}

impl TryFrom<RawLaw> for StableLaw {
    type Error = Error;

    fn try_from(raw: RawLaw) -> Result<Self> {
        StableLaw::new(raw.alpha, raw.beta, raw.sigma)
    }
}

impl From<StableLaw> for RawLaw {
    fn from(law: StableLaw) -> Self {
        RawLaw {
            alpha: law.alpha,
            beta: law.beta,
            sigma: law.sigma,
        }
    }
}

impl StableLaw {
    pub fn new(alpha: f64, beta: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidLaw(format!(
                "alpha = {alpha} must satisfy 1 < alpha < 2"
            )));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidLaw(format!(
                "beta = {beta} must satisfy -1 <= beta <= 1"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidLaw(format!("sigma = {sigma} must be > 0")));
        }
        let skew = beta * (PI * alpha / 2.0).tan();
        let shift = skew.atan() / alpha;
        let factor = (1.0 + skew * skew).powf(1.0 / (2.0 * alpha));
        Ok(Self {
            alpha,
            beta,
            sigma,
            shift,
            factor,
        })
    }

    /// Symmetric law `S_alpha(1, 0, 0)`.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The same law with unit scale.
    pub fn standardized(&self) -> Self {
        Self { sigma: 1.0, ..*self }
    }

    /// Deterministic CMS map from a uniform angle `u` in `(-pi/2, pi/2)` and
    /// an exponential draw `w > 0` to an `S_alpha(1, beta, 0)` variate.
    pub fn cms_transform(&self, u: f64, w: f64) -> f64 {
        let a = self.alpha;
        let t = a * (u + self.shift);
        self.factor * t.sin() / u.cos().powf(1.0 / a) * ((u - t).cos() / w).powf((1.0 - a) / a)
    }

    /// One draw from `S_alpha(1, beta, 0)`; `sigma` is ignored.
    pub fn sample_standard<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u = PI * (rng.sample::<f64, _>(Open01) - 0.5);
            let w: f64 = rng.sample(Exp1);
            if w <= 0.0 || u.cos() <= 0.0 || u.abs() >= FRAC_PI_2 {
                continue;
            }
            let x = self.cms_transform(u, w);
            if x.is_finite() {
                return x;
            }
        }
    }

    /// One draw from `S_alpha(sigma, beta, 0)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sigma * self.sample_standard(rng)
    }

    /// Scale of the process increment over a step `dt`: `sigma * dt^(1/alpha)`.
    pub fn increment_scale(&self, dt: f64) -> Result<f64> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step dt = {dt} must be > 0")));
        }
        Ok(self.sigma * dt.powf(1.0 / self.alpha))
    }

    /// Increment `L(t + dt) - L(t)`, distributed `S_alpha(sigma dt^(1/alpha), beta, 0)`.
    ///
    /// Equal bit for bit to `increment_scale(dt) * sample_standard(rng)`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Result<f64> {
        let scale = self.increment_scale(dt)?;
        Ok(scale * self.sample_standard(rng))
    }

    /// Theoretical characteristic function.
    pub fn characteristic_function(&self, u: f64) -> Complex64 {
        if u == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let a = self.alpha;
        let magnitude = (self.sigma * u.abs()).powf(a);
        let skew = self.beta * u.signum() * (PI * a / 2.0).tan();
        (Complex64::new(-magnitude, magnitude * skew)).exp()
    }
}

/// `(1/n) sum_j exp(i u x_j)`.
pub fn empirical_cf(samples: &[f64], u: f64) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::Domain(
            "empirical characteristic function needs at least one sample".into(),
        ));
    }
    let (re, im) = samples.iter().fold((0.0, 0.0), |(re, im), &x| {
        let (s, c) = (u * x).sin_cos();
        (re + c, im + s)
    });
    let n = samples.len() as f64;
    Ok(Complex64::new(re / n, im / n))
}

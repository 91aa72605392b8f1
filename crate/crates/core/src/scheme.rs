//! Positivity-preserving Euler-Maruyama recursion
//!
//! ```text
//! X(t_{k+1}) = X(t_k) + (mu - lambda X~(t_k)) delta + kappa X~(t_k) dL_k
//! X~(t_{k+1}) = max(X(t_{k+1}), delta)
//! ```
//!
//! Both the drift and the diffusion coefficient are evaluated at the clamped
//! state `X~`; the raw state carries forward unclamped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Uniform grid `t_k = k delta`, `k = 0..=n_steps`, with `n_steps = floor(T / delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    delta: f64,
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(delta: f64, horizon: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("step size {delta} must be > 0")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon {horizon} must be > 0")));
        }
        let mut n_steps = (horizon / delta).floor() as usize;
        // Guard the floor against a quotient rounded up across an integer.
        if n_steps as f64 * delta > horizon {
            n_steps -= 1;
        }
        Ok(Self {
            delta,
            horizon,
            n_steps,
        })
    }

    /// Like [`TimeGrid::new`] but also requires `delta` inside the model's step window.
    pub fn for_model(delta: f64, horizon: f64, params: &ModelParams) -> Result<Self> {
        params.check_step(delta)?;
        Self::new(delta, horizon)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeState {
    pub x_raw: f64,
    pub x_tilde: f64,
    pub step_index: usize,
    pub truncation_count: usize,
}

impl SchemeState {
    pub fn initial(x0: f64, delta: f64) -> Self {
        Self {
            x_raw: x0,
            x_tilde: x0.max(delta),
            step_index: 0,
            truncation_count: 0,
        }
    }
}

/// Advance the scheme by one step with noise increment `dl`.
pub fn em_step(state: &SchemeState, params: &ModelParams, delta: f64, dl: f64) -> Result<SchemeState> {
    if !dl.is_finite() {
        return Err(Error::NonFiniteIncrement {
            step: state.step_index,
        });
    }
    let xt = state.x_tilde;
    let x_raw = state.x_raw + (params.mu - params.lambda * xt) * delta + params.kappa * xt * dl;
    if !x_raw.is_finite() {
        return Err(Error::NonFiniteState {
            step: state.step_index + 1,
        });
    }
    let truncated = x_raw < delta;
    Ok(SchemeState {
        x_raw,
        x_tilde: x_raw.max(delta),
        step_index: state.step_index + 1,
        truncation_count: state.truncation_count + usize::from(truncated),
    })
}

/// Run the recursion over `increments`, calling `observe(k, x_tilde)` for
/// every grid index `k = 0..=increments.len()`. Returns the final state.
pub fn run_scheme<F>(params: &ModelParams, delta: f64, increments: &[f64], mut observe: F) -> Result<SchemeState>
where
    F: FnMut(usize, f64),
{
    let mut state = SchemeState::initial(params.x0, delta);
    observe(0, state.x_tilde);
    for &dl in increments {
        state = em_step(&state, params, delta, dl)?;
        observe(state.step_index, state.x_tilde);
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub grid: TimeGrid,
    /// `x_tilde` at `t_0..=t_N`.
    pub values: Vec<f64>,
    pub truncation_count: usize,
}

impl Path {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("a path always holds x0")
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn simulate_path(params: &ModelParams, grid: &TimeGrid, increments: &[f64]) -> Result<Path> {
    if increments.len() != grid.n_steps() {
        return Err(Error::Domain(format!(
            "expected {} increments for the grid, got {}",
            grid.n_steps(),
            increments.len()
        )));
    }
    let mut values = Vec::with_capacity(grid.n_steps() + 1);
    let last = run_scheme(params, grid.delta(), increments, |_, x| values.push(x))?;
    Ok(Path {
        grid: *grid,
        values,
        truncation_count: last.truncation_count,
    })
}

use thiserror::Error;

use crate::model::Condition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid stable law: {0}")]
    InvalidLaw(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "parameters violate the standing assumptions ({}); C_alpha = {c_alpha}, threshold 2*kappa^0.5*C_alpha/(2*alpha-1) = {threshold}",
        .failed.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
    )]
    AssumptionViolated {
        failed: Vec<Condition>,
        c_alpha: f64,
        threshold: f64,
    },

    #[error("step size {delta} is outside the admissible window (0, {delta_max})")]
    StepOutsideWindow { delta: f64, delta_max: f64 },

    #[error("moment order q = {q} must lie in [1, alpha) with alpha = {alpha}; higher moments of the noise do not exist")]
    MomentOrder { q: f64, alpha: f64 },

    #[error("{coarse} is not a power-of-two multiple of {fine}")]
    NonDyadic { coarse: f64, fine: f64 },

    #[error("non-finite noise increment at step {step}")]
    NonFiniteIncrement { step: usize },

    #[error("scheme state became non-finite at step {step}")]
    NonFiniteState { step: usize },
}

//! Positivity-preserving Euler-Maruyama simulation of
//!
//! ```text
//! dx(t) = (mu - lambda x(t)) dt + kappa x(t-) dL(t)
//! ```
//!
//! driven by a strictly alpha-stable Levy process `L`, `1 < alpha < 2`,
//! together with the Monte Carlo machinery used to measure its strong
//! convergence order.

pub mod analysis;
pub mod coupling;
pub mod error;
pub mod model;
pub mod rng;
pub mod scheme;
pub mod stable;

pub use analysis::{
    fit_order, moment_audit, positivity_audit, strong_error_experiment, ErrorFunctional, ErrorTable,
    ExperimentSpec, MomentReport, OrderFit, PositivityAudit, PositivityReport,
};
pub use coupling::{build_lattice, NoiseLattice};
pub use error::{Error, Result};
pub use model::{c_alpha, AssumptionReport, Condition, ModelParams};
pub use rng::RngStream;
pub use scheme::{em_step, simulate_path, Path, SchemeState, TimeGrid};
pub use stable::{empirical_cf, StableLaw};

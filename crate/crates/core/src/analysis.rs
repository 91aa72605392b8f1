//! Strong-error experiments, convergence-order fits and empirical audits.
//!
//! Each trajectory draws one noise lattice at the reference step. The
//! reference solution runs on that lattice directly and every coarse solution
//! runs on its dyadic aggregation, so both are driven by the same Levy path.
//!
//! Trajectories are processed in fixed-size chunks. Each chunk reduces its
//! trajectories in index order and chunk results are combined in chunk order,
//! so tables do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{build_lattice, cell_count, dyadic_levels};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::RngStream;
use crate::scheme::{run_scheme, Path};
use crate::stable::StableLaw;

const CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorFunctional {
    /// `E|x_ref(T) - X_delta(T)|^q`.
    #[default]
    Terminal,
    /// `max_k E|x_ref(t_k) - X_delta(t_k)|^q` over the coarse grid.
    SupOverGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub params: ModelParams,
    pub law: StableLaw,
    pub deltas: Vec<f64>,
    pub delta_ref: f64,
    pub horizon: f64,
    pub q: f64,
    pub m: usize,
    pub master_seed: u64,
    pub functional: ErrorFunctional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub alpha: f64,
    pub q: f64,
    /// Strictly increasing.
    pub deltas: Vec<f64>,
    pub errors: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Trajectories that entered the averages.
    pub m_trajectories: usize,
    /// Trajectories dropped because the scheme faulted on them.
    pub excluded: usize,
    /// Fraction of steps at each delta where the clamp was active.
    pub truncation_frequencies: Vec<f64>,
    /// Least-squares fit of log(error) on log(delta); `None` with fewer than
    /// three points or a non-positive error.
    pub fit: Option<OrderFit>,
}

impl ErrorTable {
    pub fn exclusion_rate(&self) -> f64 {
        let total = self.m_trajectories + self.excluded;
        if total == 0 {
            0.0
        } else {
            self.excluded as f64 / total as f64
        }
    }
}

/// Ordinary least squares of `ln(error)` on `ln(delta)`.
pub fn fit_order(deltas: &[f64], errors: &[f64]) -> Result<OrderFit> {
    if deltas.len() != errors.len() {
        return Err(Error::Domain(format!(
            "{} step sizes but {} errors",
            deltas.len(),
            errors.len()
        )));
    }
    if deltas.len() < 3 {
        return Err(Error::Domain(format!(
            "order fit needs at least 3 points, got {}",
            deltas.len()
        )));
    }
    if let Some((d, e)) = deltas
        .iter()
        .zip(errors)
        .find(|&(&d, &e)| !(d > 0.0 && e > 0.0 && d.is_finite() && e.is_finite()))
    {
        return Err(Error::Domain(format!(
            "order fit needs positive finite data, got ({d}, {e})"
        )));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("order fit needs distinct step sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(OrderFit {
        slope,
        stderr,
        intercept,
    })
}

fn check_moment_order(q: f64, alpha: f64) -> Result<()> {
    if q >= 1.0 && q < alpha {
        Ok(())
    } else {
        Err(Error::MomentOrder { q, alpha })
    }
}

impl ExperimentSpec {
    /// Checks every precondition of [`strong_error_experiment`].
    pub fn validate(&self) -> Result<()> {
        self.params.validated()?;
        if self.law.alpha() != self.params.alpha {
            return Err(Error::Domain(format!(
                "noise alpha {} differs from model alpha {}",
                self.law.alpha(),
                self.params.alpha
            )));
        }
        check_moment_order(self.q, self.params.alpha)?;
        if self.m == 0 {
            return Err(Error::Domain("need at least one trajectory".into()));
        }
        if self.deltas.is_empty() {
            return Err(Error::Domain("need at least one step size".into()));
        }
        self.params.check_step(self.delta_ref)?;
        cell_count(self.delta_ref, self.horizon)?;
        for &d in &self.deltas {
            self.params.check_step(d)?;
            let levels = dyadic_levels(d, self.delta_ref)?;
            let n = cell_count(self.delta_ref, self.horizon)?;
            if n % (1usize << levels) != 0 {
                return Err(Error::Domain(format!(
                    "horizon {} is not a multiple of step {d}",
                    self.horizon
                )));
            }
        }
        let mut sorted = self.deltas.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("step sizes must be distinct".into()));
        }
        Ok(())
    }
}

/// Per-delta running sums for one group of trajectories.
#[derive(Debug, Clone)]
struct Accumulator {
    used: usize,
    excluded: usize,
    // Terminal: one slot per delta. Sup: one slot per coarse grid point.
    sums: Vec<Vec<f64>>,
    sq_sums: Vec<Vec<f64>>,
    truncations: Vec<usize>,
}

impl Accumulator {
    fn new(slots: &[usize]) -> Self {
        Self {
            used: 0,
            excluded: 0,
            sums: slots.iter().map(|&n| vec![0.0; n]).collect(),
            sq_sums: slots.iter().map(|&n| vec![0.0; n]).collect(),
            truncations: vec![0; slots.len()],
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.used += other.used;
        self.excluded += other.excluded;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.sq_sums.iter_mut().zip(&other.sq_sums) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.truncations.iter_mut().zip(&other.truncations) {
            *a += b;
        }
    }
}

struct TrajectoryResult {
    /// Per delta, the error sample(s) for this trajectory.
    errors: Vec<Vec<f64>>,
    truncations: Vec<usize>,
}

fn run_trajectory(spec: &ExperimentSpec, deltas: &[f64], index: u64) -> Result<TrajectoryResult> {
    let mut rng = RngStream::new(spec.master_seed, index);
    let fine = build_lattice(&spec.law, spec.delta_ref, spec.horizon, &mut rng)?;
    let sup = spec.functional == ErrorFunctional::SupOverGrid;

    let mut reference = Vec::new();
    let ref_state = run_scheme(&spec.params, spec.delta_ref, fine.increments(), |_, x| {
        if sup {
            reference.push(x);
        }
    })?;

    let coarse = fine.coarsen_all(deltas)?;
    let mut errors = Vec::with_capacity(deltas.len());
    let mut truncations = Vec::with_capacity(deltas.len());
    for (&delta, lattice) in deltas.iter().zip(&coarse) {
        let stride = fine.len() / lattice.len();
        let mut pointwise = Vec::new();
        let state = run_scheme(&spec.params, delta, lattice.increments(), |k, x| {
            if sup {
                pointwise.push((reference[k * stride] - x).abs().powf(spec.q));
            }
        })?;
        if !sup {
            pointwise.push((ref_state.x_tilde - state.x_tilde).abs().powf(spec.q));
        }
        errors.push(pointwise);
        truncations.push(state.truncation_count);
    }
    Ok(TrajectoryResult {
        errors,
        truncations,
    })
}

/// Monte Carlo strong-error table for one alpha.
pub fn strong_error_experiment(spec: &ExperimentSpec) -> Result<ErrorTable> {
    spec.validate()?;
    let mut deltas = spec.deltas.clone();
    deltas.sort_by(f64::total_cmp);

    let steps: Vec<usize> = deltas
        .iter()
        .map(|&d| cell_count(d, spec.horizon))
        .collect::<Result<_>>()?;
    let slots: Vec<usize> = match spec.functional {
        ErrorFunctional::Terminal => vec![1; deltas.len()],
        ErrorFunctional::SupOverGrid => steps.iter().map(|n| n + 1).collect(),
    };

    let n_chunks = spec.m.div_ceil(CHUNK);
    let partials: Vec<Accumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::new(&slots);
            let end = ((c + 1) * CHUNK).min(spec.m);
            for i in c * CHUNK..end {
                match run_trajectory(spec, &deltas, i as u64) {
                    Ok(traj) => {
                        acc.used += 1;
                        for (j, errs) in traj.errors.iter().enumerate() {
                            for (k, &e) in errs.iter().enumerate() {
                                acc.sums[j][k] += e;
                                acc.sq_sums[j][k] += e * e;
                            }
                            acc.truncations[j] += traj.truncations[j];
                        }
                    }
                    Err(Error::NonFiniteIncrement { .. } | Error::NonFiniteState { .. }) => {
                        acc.excluded += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = Accumulator::new(&slots);
    for p in &partials {
        total.merge(p);
    }

    let m = total.used as f64;
    let mut errors = Vec::with_capacity(deltas.len());
    let mut standard_errors = Vec::with_capacity(deltas.len());
    for j in 0..deltas.len() {
        // Largest mean over the slots; a single slot in terminal mode.
        let (k, mean) = total.sums[j]
            .iter()
            .map(|s| s / m)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
        let var = if total.used > 1 {
            ((total.sq_sums[j][k] - m * mean * mean) / (m - 1.0)).max(0.0)
        } else {
            0.0
        };
        errors.push(if total.used == 0 { f64::NAN } else { mean });
        standard_errors.push((var / m).sqrt());
    }
    let truncation_frequencies = total
        .truncations
        .iter()
        .zip(&steps)
        .map(|(&t, &n)| t as f64 / (m * n as f64))
        .collect();
    let fit = fit_order(&deltas, &errors).ok();

    Ok(ErrorTable {
        alpha: spec.params.alpha,
        q: spec.q,
        deltas,
        errors,
        standard_errors,
        m_trajectories: total.used,
        excluded: total.excluded,
        truncation_frequencies,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationStats {
    pub delta: f64,
    pub paths: usize,
    pub steps: usize,
    pub truncations: usize,
}

impl TruncationStats {
    pub fn frequency(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.truncations as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    /// Smallest grid value seen across all paths.
    pub min_value: f64,
    /// Grid values strictly below their path's step size.
    pub violations: usize,
    pub values_checked: usize,
    /// One entry per distinct step size, sorted by step size.
    pub truncation: Vec<TruncationStats>,
}

/// Streaming positivity audit; feed paths with [`PositivityAudit::observe`].
#[derive(Debug, Clone)]
pub struct PositivityAudit {
    report: PositivityReport,
}

impl Default for PositivityAudit {
    fn default() -> Self {
        Self {
            report: PositivityReport {
                min_value: f64::INFINITY,
                violations: 0,
                values_checked: 0,
                truncation: Vec::new(),
            },
        }
    }
}

impl PositivityAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, path: &Path) {
        let delta = path.grid.delta();
        let r = &mut self.report;
        for &v in &path.values {
            r.min_value = r.min_value.min(v);
            // NaN must count as a violation.
            if !(v >= delta) {
                r.violations += 1;
            }
        }
        r.values_checked += path.values.len();
        let slot = match r.truncation.iter().position(|t| t.delta == delta) {
            Some(i) => i,
            None => {
                r.truncation.push(TruncationStats {
                    delta,
                    paths: 0,
                    steps: 0,
                    truncations: 0,
                });
                r.truncation
                    .sort_by(|a, b| a.delta.total_cmp(&b.delta));
                r.truncation.iter().position(|t| t.delta == delta).expect("just inserted")
            }
        };
        let t = &mut r.truncation[slot];
        t.paths += 1;
        t.steps += path.grid.n_steps();
        t.truncations += path.truncation_count;
    }

    pub fn report(&self) -> &PositivityReport {
        &self.report
    }

    pub fn finish(self) -> PositivityReport {
        self.report
    }
}

pub fn positivity_audit<'a, I>(paths: I) -> PositivityReport
where
    I: IntoIterator<Item = &'a Path>,
{
    let mut audit = PositivityAudit::new();
    for p in paths {
        audit.observe(p);
    }
    audit.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub q: f64,
    /// `mean(x_tilde(t_k)^q)` over all paths, per grid index.
    pub means: Vec<f64>,
    pub max_mean: f64,
    /// The same maximum computed from the first half of the paths.
    pub max_mean_half: f64,
    /// `max_mean / max_mean_half`: stability under doubling the sample.
    pub stability_ratio: f64,
}

/// Empirical q-th moments on a common grid. Requires `1 <= q < alpha`.
pub fn moment_audit(paths: &[Path], q: f64, alpha: f64) -> Result<MomentReport> {
    check_moment_order(q, alpha)?;
    let first = paths
        .first()
        .ok_or_else(|| Error::Domain("moment audit needs at least one path".into()))?;
    let len = first.values.len();
    if paths.iter().any(|p| p.grid != first.grid || p.values.len() != len) {
        return Err(Error::Domain("all paths must share one time grid".into()));
    }
    let means_of = |set: &[Path]| -> Vec<f64> {
        let mut sums = vec![0.0; len];
        for p in set {
            for (s, v) in sums.iter_mut().zip(&p.values) {
                *s += v.abs().powf(q);
            }
        }
        sums.iter().map(|s| s / set.len() as f64).collect()
    };
    let max_of = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let means = means_of(paths);
    let max_mean = max_of(&means);
    let half = &paths[..paths.len().div_ceil(2)];
    let max_mean_half = max_of(&means_of(half));
    Ok(MomentReport {
        q,
        means,
        max_mean,
        max_mean_half,
        stability_ratio: max_mean / max_mean_half,
    })
}

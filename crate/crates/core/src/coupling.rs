//! Fine-resolution noise shared between the reference and coarse solutions.
//!
//! A [`NoiseLattice`] holds the increments of one Levy path over a uniform
//! grid. Coarser grids are obtained by summing adjacent pairs, one halving at
//! a time, so the coarse noise is the exact blockwise sum of the fine noise.
//! Each cell keeps a double-double `(hi, lo)` value built with error-free
//! transforms. Halving a lattice that was itself obtained by halving performs
//! the same operations in the same order as halving directly from the fine
//! level, which makes repeated aggregation bit-for-bit associative.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stable::StableLaw;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLattice {
    law: StableLaw,
    delta: f64,
    increments: Vec<f64>,
    residuals: Vec<f64>,
    stream_index: u64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bp = s - a;
    let ap = s - bp;
    (s, (a - ap) + (b - bp))
}

/// Number of halvings taking `fine` to `coarse`, if `coarse = 2^k fine`.
pub fn dyadic_levels(coarse: f64, fine: f64) -> Result<u32> {
    let ratio = coarse / fine;
    let r = ratio.round();
    let tol = 1e-12 * ratio.abs().max(1.0);
    if !(fine > 0.0 && coarse > 0.0) || (ratio - r).abs() > tol || r < 1.0 {
        return Err(Error::NonDyadic { coarse, fine });
    }
    let r = r as u64;
    if !r.is_power_of_two() {
        return Err(Error::NonDyadic { coarse, fine });
    }
    Ok(r.trailing_zeros())
}

/// Number of cells of width `delta` in `[0, horizon]`; the ratio must be an integer.
pub fn cell_count(delta: f64, horizon: f64) -> Result<usize> {
    if !(delta > 0.0 && horizon > 0.0) {
        return Err(Error::Domain(format!(
            "step {delta} and horizon {horizon} must be positive"
        )));
    }
    let ratio = horizon / delta;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
        return Err(Error::Domain(format!(
            "horizon {horizon} is not an integer multiple of step {delta}"
        )));
    }
    Ok(n as usize)
}

/// Draw `horizon / delta_fine` i.i.d. increments `S_alpha(sigma delta_fine^(1/alpha), beta, 0)`.
pub fn build_lattice(law: &StableLaw, delta_fine: f64, horizon: f64, rng: &mut RngStream) -> Result<NoiseLattice> {
    let n = cell_count(delta_fine, horizon)?;
    let scale = law.increment_scale(delta_fine)?;
    let increments = (0..n).map(|_| scale * law.sample_standard(rng)).collect();
    Ok(NoiseLattice {
        law: *law,
        delta: delta_fine,
        increments,
        residuals: vec![0.0; n],
        stream_index: rng.stream_index(),
    })
}

impl NoiseLattice {
    /// Wrap externally supplied increments as a lattice of cell width `delta`.
    pub fn from_increments(law: StableLaw, delta: f64, increments: Vec<f64>, stream_index: u64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("cell width {delta} must be > 0")));
        }
        let n = increments.len();
        Ok(Self {
            law,
            delta,
            increments,
            residuals: vec![0.0; n],
            stream_index,
        })
    }

    pub fn law(&self) -> &StableLaw {
        &self.law
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn horizon(&self) -> f64 {
        self.delta * self.len() as f64
    }

    /// Sum adjacent pairs of cells.
    pub fn halve(&self) -> Result<NoiseLattice> {
        if self.len() % 2 != 0 {
            return Err(Error::Domain(format!(
                "cannot halve a lattice with an odd number ({}) of cells",
                self.len()
            )));
        }
        let n = self.len() / 2;
        let mut increments = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for j in 0..n {
            let (a, b) = (2 * j, 2 * j + 1);
            let (s, e) = two_sum(self.increments[a], self.increments[b]);
            let e = e + (self.residuals[a] + self.residuals[b]);
            let (hi, lo) = two_sum(s, e);
            increments.push(hi);
            residuals.push(lo);
        }
        Ok(NoiseLattice {
            law: self.law,
            delta: 2.0 * self.delta,
            increments,
            residuals,
            stream_index: self.stream_index,
        })
    }

    /// Lattice with cells of width `delta_coarse = 2^k delta`.
    pub fn coarsen(&self, delta_coarse: f64) -> Result<NoiseLattice> {
        let levels = dyadic_levels(delta_coarse, self.delta)?;
        let factor = 1usize << levels;
        if self.len() % factor != 0 {
            return Err(Error::Domain(format!(
                "{} cells do not split evenly into blocks of {factor}",
                self.len()
            )));
        }
        let mut out = self.clone();
        for _ in 0..levels {
            out = out.halve()?;
        }
        Ok(out)
    }

    /// Coarse increments: element `j` is the sum of fine cells in block `j`.
    pub fn aggregate(&self, delta_coarse: f64) -> Result<Vec<f64>> {
        Ok(self.coarsen(delta_coarse)?.increments)
    }

    /// Every dyadic coarsening requested in `deltas`, in the order given.
    pub fn coarsen_all(&self, deltas: &[f64]) -> Result<Vec<NoiseLattice>> {
        let mut levels = deltas
            .iter()
            .map(|&d| dyadic_levels(d, self.delta))
            .collect::<Result<Vec<_>>>()?;
        let max_level = levels.iter().copied().max().unwrap_or(0);
        if self.len() % (1usize << max_level) != 0 {
            return Err(Error::Domain(format!(
                "{} cells do not split evenly into blocks of {}",
                self.len(),
                1usize << max_level
            )));
        }
        let mut ladder = vec![self.clone()];
        for _ in 0..max_level {
            let next = ladder.last().expect("non-empty").halve()?;
            ladder.push(next);
        }
        Ok(levels.drain(..).map(|l| ladder[l as usize].clone()).collect())
    }
}

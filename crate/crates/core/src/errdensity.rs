//! Density estimators for the regression error.

use serde::{Deserialize, Serialize};

use crate::kernels::{k0_scaled_diff, k1_value};
use crate::quadrature::trapezoid;
use crate::regression::{check_bandwidth, nw_estimate, ResidualSet, Sample};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateKind {
    /// Kernel estimate on estimated residuals.
    Feasible,
    /// Same estimate on the true (simulated) errors.
    Oracle,
    /// Conditional kernel estimate of `ε | X = x`.
    NaiveConditional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub b1: T,
    pub kind: EstimateKind,
    pub n_effective: usize,
}

pub(crate) fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if !grid.iter().all(|g| g.is_finite()) {
        return Err(Error::InvalidGrid("non-finite grid point".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `(1/(b1 M)) Σ_{mask} K1((eᵢ − ε)/b1)` at each grid point, `M` = number of masked-in terms.
fn masked_kde<T: Scalar>(
    values: &[T],
    mask: &[bool],
    b1: T,
    grid: &[T],
    kind: EstimateKind,
) -> Result<DensityEstimate<T>> {
    check_bandwidth("b1", b1)?;
    check_grid(grid)?;
    if values.len() != mask.len() {
        return Err(Error::DimensionMismatch {
            expected: mask.len(),
            found: values.len(),
        });
    }
    let used: Vec<T> = values
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .collect();
    if used.is_empty() {
        return Err(Error::NoTrimmedObservations);
    }
    let inv = b1.recip();
    let scale = (b1 * T::from_count(used.len())).recip();
    let out = grid
        .iter()
        .map(|&e| {
            used.iter()
                .fold(T::zero(), |acc, &r| acc + k1_value((r - e) * inv))
                * scale
        })
        .collect();
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        values: out,
        b1,
        kind,
        n_effective: used.len(),
    })
}

/// Feasible two-step estimator on the trimmed-in residuals.
pub fn two_step_density<T: Scalar>(
    res: &ResidualSet<T>,
    b1: T,
    grid: &[T],
) -> Result<DensityEstimate<T>> {
    masked_kde(&res.residuals, &res.trim_mask, b1, grid, EstimateKind::Feasible)
}

/// The unfeasible estimator: identical to [`two_step_density`] with the true errors.
pub fn oracle_density<T: Scalar>(
    true_errors: &[T],
    trim_mask: &[bool],
    b1: T,
    grid: &[T],
) -> Result<DensityEstimate<T>> {
    masked_kde(true_errors, trim_mask, b1, grid, EstimateKind::Oracle)
}

/// Kernel estimate of the conditional density of `Y − m̂(x)` given `X = x`.
///
/// `b0` is the bandwidth of the inner Nadaraya–Watson fit `m̂(x)`; `(h0, h1)`
/// are the covariate and response bandwidths of the conditional estimate.
pub fn naive_conditional_density<T: Scalar>(
    sample: &Sample<T>,
    b0: T,
    h0: T,
    h1: T,
    x: &[T],
    grid: &[T],
) -> Result<DensityEstimate<T>> {
    check_bandwidth("h0", h0)?;
    check_bandwidth("h1", h1)?;
    check_grid(grid)?;
    let m_hat = nw_estimate(sample, b0, x)?;
    let inv_h0 = h0.recip();
    let weights: Vec<T> = sample
        .rows()
        .map(|r| k0_scaled_diff(r, x, inv_h0))
        .collect();
    let n = T::from_count(sample.n());
    let hd = h0.powi(sample.d() as i32);
    let denom = weights.iter().fold(T::zero(), |a, &w| a + w) / (n * hd);
    if !(denom > T::zero()) {
        return Err(Error::EmptyNeighborhood);
    }
    let inv_h1 = h1.recip();
    let values = grid
        .iter()
        .map(|&e| {
            let num = weights
                .iter()
                .zip(sample.y())
                .filter(|(&w, _)| w > T::zero())
                .fold(T::zero(), |acc, (&w, &yi)| {
                    acc + w * k1_value((yi - m_hat - e) * inv_h1)
                })
                / (n * hd * h1);
            num / denom
        })
        .collect();
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        values,
        b1: h1,
        kind: EstimateKind::NaiveConditional,
        n_effective: weights.iter().filter(|&&w| w > T::zero()).count(),
    })
}

/// Integrated squared error against `f_true` by the trapezoid rule over the grid.
pub fn ise<T: Scalar, F: Fn(T) -> T>(est: &DensityEstimate<T>, f_true: F) -> Result<T> {
    if est.grid.len() < 2 {
        return Err(Error::InvalidGrid("ISE needs at least 2 grid points".into()));
    }
    let sq: Vec<T> = est
        .grid
        .iter()
        .zip(&est.values)
        .map(|(&e, &v)| {
            let r = v - f_true(e);
            r * r
        })
        .collect();
    Ok(trapezoid(&est.grid, &sq))
}

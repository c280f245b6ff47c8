//! Nadaraya–Watson regression with the product kernel `K0`, its leave-one-out
//! variant, the covariate density estimate, and trimmed residual extraction.
//!
//! All sums run over `j = 0..n` in index order, so results do not depend on
//! how callers schedule evaluations.

use serde::{Deserialize, Serialize};

use crate::kernels::k0_scaled_diff;
use crate::{Error, Result, Scalar};

/// Covariates (row-major `n × d`) and responses of `Y = m(X) + ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: usize,
}

impl<T: Scalar> Sample<T> {
    /// Builds a sample from a row-major covariate buffer of length `n·d`.
    pub fn new(x: Vec<T>, y: Vec<T>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSample("dimension must be >= 1".into()));
        }
        if x.len() != y.len() * d {
            return Err(Error::InvalidSample(format!(
                "covariate buffer has {} entries, expected {} x {}",
                x.len(),
                y.len(),
                d
            )));
        }
        if y.len() < 2 {
            return Err(Error::InvalidSample("need at least 2 observations".into()));
        }
        if !x.iter().chain(&y).all(|v| v.is_finite()) {
            return Err(Error::InvalidSample("non-finite entry".into()));
        }
        Ok(Self { x, y, d })
    }

    pub fn from_rows(rows: &[Vec<T>], y: Vec<T>) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidSample("ragged covariate rows".into()));
        }
        if rows.len() != y.len() {
            return Err(Error::InvalidSample(format!(
                "{} covariate rows but {} responses",
                rows.len(),
                y.len()
            )));
        }
        Self::new(rows.concat(), y, d)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.x.chunks_exact(self.d)
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    /// Copy of the sample with observation `i` removed.
    pub fn without_row(&self, i: usize) -> Result<Self> {
        let x = self
            .rows()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, r)| r.iter().copied())
            .collect();
        let y = self
            .y
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| *v)
            .collect();
        Self::new(x, y, self.d)
    }
}

/// Axis-aligned inner box of the covariate support used for trimming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimRegion<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> TrimRegion<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidTrimRegion(format!(
                "bounds of length {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] < upper[j])) {
            return Err(Error::InvalidTrimRegion(format!(
                "lower[{j}] = {} is not below upper[{j}] = {}",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Empirical bounding box of the covariates shrunk by 10% of its width on each side.
    pub fn auto(sample: &Sample<T>) -> Result<Self> {
        let d = sample.d();
        let mut lo = vec![T::infinity(); d];
        let mut hi = vec![T::neg_infinity(); d];
        for r in sample.rows() {
            for j in 0..d {
                lo[j] = lo[j].min(r[j]);
                hi[j] = hi[j].max(r[j]);
            }
        }
        let margin = T::lit(0.1);
        for j in 0..d {
            let w = hi[j] - lo[j];
            lo[j] = lo[j] + margin * w;
            hi[j] = hi[j] - margin * w;
        }
        Self::new(lo, hi)
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    #[inline]
    pub fn contains(&self, p: &[T]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Lebesgue volume of the box.
    pub fn volume(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(T::one(), |acc, (&lo, &hi)| acc * (hi - lo))
    }
}

/// Counts of observations excluded from the second step, by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualDiagnostics {
    pub outside_region: usize,
    /// In-region observations whose leave-one-out denominator was zero.
    pub empty_neighborhood: usize,
}

/// Leave-one-out residuals with the trimming mask.
///
/// `residuals[i]` is `NaN` wherever `trim_mask[i]` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet<T> {
    pub residuals: Vec<T>,
    pub trim_mask: Vec<bool>,
    pub b0: T,
    pub n_trimmed_in: usize,
    pub diagnostics: ResidualDiagnostics,
}

impl<T: Scalar> ResidualSet<T> {
    /// Residuals at trimmed-in indices, in index order.
    pub fn trimmed_in(&self) -> impl Iterator<Item = T> + '_ {
        self.residuals
            .iter()
            .zip(&self.trim_mask)
            .filter(|(_, &m)| m)
            .map(|(&r, _)| r)
    }

    /// Fraction of observations that entered the second step.
    pub fn trimmed_in_fraction(&self) -> T {
        T::from_count(self.n_trimmed_in) / T::from_count(self.trim_mask.len())
    }
}

pub(crate) fn check_bandwidth<T: Scalar>(name: &str, b: T) -> Result<()> {
    if b > T::zero() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {b}")))
    }
}

fn check_point<T: Scalar>(sample: &Sample<T>, x: &[T]) -> Result<()> {
    if x.len() != sample.d() {
        return Err(Error::DimensionMismatch {
            expected: sample.d(),
            found: x.len(),
        });
    }
    Ok(())
}

/// Kernel estimate of the covariate density, `(1/(n b0^d)) Σ K0((Xᵢ − x)/b0)`.
pub fn g_hat<T: Scalar>(sample: &Sample<T>, b0: T, x: &[T]) -> Result<T> {
    check_bandwidth("b0", b0)?;
    check_point(sample, x)?;
    let inv = b0.recip();
    let s = sample
        .rows()
        .fold(T::zero(), |acc, r| acc + k0_scaled_diff(r, x, inv));
    Ok(s / (T::from_count(sample.n()) * b0.powi(sample.d() as i32)))
}

/// Nadaraya–Watson estimate of `m(x)`.
pub fn nw_estimate<T: Scalar>(sample: &Sample<T>, b0: T, x: &[T]) -> Result<T> {
    check_bandwidth("b0", b0)?;
    check_point(sample, x)?;
    let inv = b0.recip();
    let (mut num, mut den) = (T::zero(), T::zero());
    for (r, &yj) in sample.rows().zip(sample.y()) {
        let w = k0_scaled_diff(r, x, inv);
        num = num + w * yj;
        den = den + w;
    }
    if den > T::zero() {
        Ok(num / den)
    } else {
        Err(Error::EmptyNeighborhood)
    }
}

#[inline]
fn loo_unchecked<T: Scalar>(sample: &Sample<T>, inv_b0: T, i: usize) -> Option<T> {
    let xi = sample.row(i);
    let (mut num, mut den) = (T::zero(), T::zero());
    for (j, (r, &yj)) in sample.rows().zip(sample.y()).enumerate() {
        if j == i {
            continue;
        }
        let w = k0_scaled_diff(r, xi, inv_b0);
        num = num + w * yj;
        den = den + w;
    }
    (den > T::zero()).then(|| num / den)
}

/// Leave-one-out Nadaraya–Watson estimate at `Xᵢ`, excluding observation `i`.
pub fn nw_loo<T: Scalar>(sample: &Sample<T>, b0: T, i: usize) -> Result<T> {
    check_bandwidth("b0", b0)?;
    if i >= sample.n() {
        return Err(Error::InvalidParameter(format!(
            "index {i} out of range for n = {}",
            sample.n()
        )));
    }
    loo_unchecked(sample, b0.recip(), i).ok_or(Error::EmptyNeighborhood)
}

/// Residuals `ε̂ᵢ = Yᵢ − m̂ᵢ` for every observation with `Xᵢ` in the trim
/// region whose leave-one-out fit exists. Direct `O(n²)` summation.
pub fn residuals<T: Scalar>(
    sample: &Sample<T>,
    b0: T,
    trim: &TrimRegion<T>,
) -> Result<ResidualSet<T>> {
    check_bandwidth("b0", b0)?;
    if trim.dimension() != sample.d() {
        return Err(Error::DimensionMismatch {
            expected: sample.d(),
            found: trim.dimension(),
        });
    }
    let n = sample.n();
    let inv = b0.recip();
    let mut out = vec![T::nan(); n];
    let mut mask = vec![false; n];
    let mut diagnostics = ResidualDiagnostics::default();
    for i in 0..n {
        if !trim.contains(sample.row(i)) {
            diagnostics.outside_region += 1;
            continue;
        }
        match loo_unchecked(sample, inv, i) {
            Some(m) => {
                out[i] = sample.y()[i] - m;
                mask[i] = true;
            }
            None => diagnostics.empty_neighborhood += 1,
        }
    }
    let n_trimmed_in = mask.iter().filter(|&&m| m).count();
    if n_trimmed_in == 0 {
        return Err(Error::AllTrimmed);
    }
    Ok(ResidualSet {
        residuals: out,
        trim_mask: mask,
        b0,
        n_trimmed_in,
        diagnostics,
    })
}

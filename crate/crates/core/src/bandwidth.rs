//! Bandwidth rules for the two-step estimator.
//!
//! The risk of the feasible estimator decomposes as `AMSE(b1) + R_n(b0, b1)`.
//! Minimizing `R_n` over `b0` gives [`b0_star`]; minimizing the total over `b1`
//! gives the regimes of [`b1_star_rate`]. These are order statements, so every
//! rule carries a multiplicative constant (default 1).

use serde::{Deserialize, Serialize};

use crate::kernels::KernelConstants;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandwidthSource {
    ClosedForm,
    NumericMin,
    AmisePlugin,
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthPlan<T> {
    pub b0: T,
    pub b1: T,
    pub c0: T,
    pub c1: T,
    pub source: BandwidthSource,
}

impl<T: Scalar> BandwidthPlan<T> {
    /// `b1 = c1 · rate(n, d)` and `b0 = b0_star(n, d, b1, c0)`.
    pub fn closed_form(n: usize, d: usize, c0: T, c1: T) -> Result<Self> {
        check_positive("c0", c0)?;
        check_positive("c1", c1)?;
        let b1 = b1_star_rate(n, d, c1);
        Ok(Self {
            b0: b0_star(n, d, b1, c0),
            b1,
            c0,
            c1,
            source: BandwidthSource::ClosedForm,
        })
    }

    /// AMISE-optimal `b1`, with `b0 = b0_star(n, d, b1, c0)`.
    pub fn amise_plugin(
        n: usize,
        d: usize,
        c0: T,
        f2_sq_integral: T,
        k1: &KernelConstants<T>,
        p_in_region: T,
    ) -> Result<Self> {
        check_positive("c0", c0)?;
        let b1 = b1_amise_plugin(f2_sq_integral, k1, p_in_region, n)?;
        Ok(Self {
            b0: b0_star(n, d, b1, c0),
            b1,
            c0,
            c1: T::one(),
            source: BandwidthSource::AmisePlugin,
        })
    }

    pub fn manual(b0: T, b1: T) -> Result<Self> {
        check_positive("b0", b0)?;
        check_positive("b1", b1)?;
        Ok(Self {
            b0,
            b1,
            c0: T::one(),
            c1: T::one(),
            source: BandwidthSource::Manual,
        })
    }
}

fn check_positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// `R_n(b0, b1) = b0⁴ + [(n b1⁵)^(-1/2) + (b0^d/b1³)^(1/2)]² V² + [1/b1 + (b0^d/b1⁷)^(1/2)]² V³`
/// with `V = b0⁴ + 1/(n b0^d)`.
pub fn rn_risk<T: Scalar>(b0: T, b1: T, n: usize, d: usize) -> T {
    let nf = T::from_count(n);
    let b0d = b0.powi(d as i32);
    let b0_4 = b0.powi(4);
    let v = b0_4 + (nf * b0d).recip();
    let a = (nf * b1.powi(5)).sqrt().recip() + (b0d / b1.powi(3)).sqrt();
    let c = b1.recip() + (b0d / b1.powi(7)).sqrt();
    b0_4 + a * a * v * v + c * c * v * v * v
}

/// `b1⁴ + 1/(n b1)`.
pub fn amse_b1<T: Scalar>(b1: T, n: usize) -> T {
    b1.powi(4) + (T::from_count(n) * b1).recip()
}

/// The two candidate orders of the `R_n`-minimizing `b0`:
/// `(1/(n² b1³))^(1/(d+4))` and `(1/(n³ b1⁷))^(1/(2d+4))`.
pub fn b0_star_branches<T: Scalar>(n: usize, d: usize, b1: T) -> (T, T) {
    let nf = T::from_count(n);
    let df = T::from_count(d);
    let four = T::lit(4.0);
    let first = (nf * nf * b1.powi(3)).recip().powf((df + four).recip());
    let second = (nf * nf * nf * b1.powi(7))
        .recip()
        .powf((T::lit(2.0) * df + four).recip());
    (first, second)
}

pub fn b0_star<T: Scalar>(n: usize, d: usize, b1: T, c0: T) -> T {
    let (a, b) = b0_star_branches(n, d, b1);
    c0 * a.max(b)
}

/// Exponent `e` in `b1* ≍ n^(-e)`: `1/5` for `d ≤ 2`, `3/(2d+11)` otherwise.
pub fn b1_star_exponent(d: usize) -> f64 {
    if d <= 2 {
        0.2
    } else {
        3.0 / (2.0 * d as f64 + 11.0)
    }
}

pub fn b1_star_rate<T: Scalar>(n: usize, d: usize, c1: T) -> T {
    c1 * T::from_count(n).powf(-T::lit(b1_star_exponent(d)))
}

/// AMISE-optimal second-step bandwidth
/// `[ (∫K1² / P) / (∫(f'')² (∫v²K1)²) ]^(1/5) n^(-1/5)`.
pub fn b1_amise_plugin<T: Scalar>(
    f2_sq_integral: T,
    k1: &KernelConstants<T>,
    p_in_region: T,
    n: usize,
) -> Result<T> {
    if f2_sq_integral == T::zero() {
        return Err(Error::ZeroCurvature);
    }
    if !(f2_sq_integral > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "integrated squared curvature must be positive, got {f2_sq_integral}"
        )));
    }
    if !(p_in_region > T::zero() && p_in_region <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "trim probability must be in (0, 1], got {p_in_region}"
        )));
    }
    let ratio = (k1.squared_integral / p_in_region)
        / (f2_sq_integral * k1.second_moment * k1.second_moment);
    let fifth = T::lit(0.2);
    Ok(ratio.powf(fifth) * T::from_count(n).powf(-fifth))
}

const ARGMIN_GRID: usize = 400;

/// Search interval `[n^(-1/d)·10⁻², 1]` used by [`rn_argmin_numeric`].
pub fn rn_search_interval<T: Scalar>(n: usize, d: usize) -> (T, T) {
    let lo = T::from_count(n).powf(-T::from_count(d).recip()) * T::lit(1e-2);
    (lo, T::one())
}

/// Numeric minimizer of `R_n(·, b1)`: a 400-point log-spaced grid search,
/// refined once by golden-section search between the neighbours of the best
/// grid point.
pub fn rn_argmin_numeric<T: Scalar>(n: usize, d: usize, b1: T) -> T {
    let (lo, hi) = rn_search_interval::<T>(n, d);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / T::from_count(ARGMIN_GRID - 1);
    let at = |k: usize| (llo + step * T::from_count(k)).exp();
    let risk = |t: T| rn_risk(t.exp(), b1, n, d);

    let best = (0..ARGMIN_GRID)
        .map(|k| (k, rn_risk(at(k), b1, n, d)))
        .fold((0, T::infinity()), |acc, x| if x.1 < acc.1 { x } else { acc })
        .0;
    let mut a = llo + step * T::from_count(best.saturating_sub(1));
    let mut b = llo + step * T::from_count((best + 1).min(ARGMIN_GRID - 1));

    // golden-section refinement in log b0
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut e = a + (b - a) * inv_phi;
    let (mut fc, mut fe) = (risk(c), risk(e));
    for _ in 0..100 {
        if (b - a).abs() <= T::lit(1e-12) {
            break;
        }
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - (b - a) * inv_phi;
            fc = risk(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + (b - a) * inv_phi;
            fe = risk(e);
        }
    }
    let refined = ((a + b) * T::lit(0.5)).exp();
    let grid_best = at(best);
    if rn_risk(refined, b1, n, d) <= rn_risk(grid_best, b1, n, d) {
        refined
    } else {
        grid_best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum A11Flag {
    /// Every condition holds with room to spare.
    Ok,
    /// A condition sits exactly at its limit (e.g. `n b0^d b1³` bounded).
    Boundary,
    Violated,
}

/// The three quantities of the asymptotic-normality bandwidth conditions
/// `n b0^(d+4) = O(1)`, `n b0⁴ b1 = o(1)`, `n b0^d b1³ → ∞`.
///
/// `exponents` are the implied powers of `n` obtained by writing
/// `b0 = n^(-a0)`, `b1 = n^(-a1)` at the given `n`; the flag classifies them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A11Check {
    pub n_b0_d4: f64,
    pub n_b0_4_b1: f64,
    pub n_b0_d_b1_3: f64,
    pub exponents: [f64; 3],
    pub flag: A11Flag,
}

const A11_TOL: f64 = 1e-6;

pub fn check_a11<T: Scalar>(b0: T, b1: T, n: usize, d: usize) -> A11Check {
    let (b0, b1) = (b0.to_f64_lossy(), b1.to_f64_lossy());
    let nf = n as f64;
    let di = d as i32;
    let q1 = nf * b0.powi(di + 4);
    let q2 = nf * b0.powi(4) * b1;
    let q3 = nf * b0.powi(di) * b1.powi(3);
    let ln_n = nf.ln();
    let exponents = if n >= 2 {
        [q1.ln() / ln_n, q2.ln() / ln_n, q3.ln() / ln_n]
    } else {
        [f64::NAN; 3]
    };
    let [e1, e2, e3] = exponents;
    let flag = if exponents.iter().any(|e| e.is_nan()) || e1 > A11_TOL || e2 > A11_TOL || e3 < -A11_TOL {
        A11Flag::Violated
    } else if e2.abs() <= A11_TOL || e3.abs() <= A11_TOL {
        A11Flag::Boundary
    } else {
        A11Flag::Ok
    };
    A11Check {
        n_b0_d4: q1,
        n_b0_4_b1: q2,
        n_b0_d_b1_3: q3,
        exponents,
        flag,
    }
}

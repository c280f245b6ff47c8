//! Compactly supported kernels.
//!
//! `K0` is the product of rescaled Epanechnikov factors
//! `k0(u) = (3/2)(1 − 4u²)` on `[-1/2, 1/2]`, used for the covariates.
//! `K1(v) = (315/256)(1 − v²)⁴` on `[-1, 1]` is used for the residuals; its
//! derivatives up to order three vanish at `±1`, so it is `C³` on the real line.

use serde::{Deserialize, Serialize};

use crate::quadrature::{simpson, DEFAULT_PANELS};
use crate::{Error, Result, Scalar};

const K1_NORM: f64 = 315.0 / 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// Product Epanechnikov rescaled to `[-1/2, 1/2]^d` (covariate kernel).
    Epanechnikov01,
    /// `(315/256)(1 − v²)⁴` on `[-1, 1]` (residual kernel).
    QuarticSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub dimension: usize,
    /// Half-width of the support along each coordinate.
    pub support_halfwidth: f64,
}

impl KernelSpec {
    /// Covariate kernel on `[-1/2, 1/2]^d`.
    pub fn k0(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("kernel dimension must be >= 1".into()));
        }
        Ok(Self {
            family: KernelFamily::Epanechnikov01,
            dimension,
            support_halfwidth: 0.5,
        })
    }

    /// Univariate residual kernel on `[-1, 1]`.
    pub fn k1() -> Self {
        Self {
            family: KernelFamily::QuarticSmooth,
            dimension: 1,
            support_halfwidth: 1.0,
        }
    }
}

/// Moment constants of a kernel. For the product kernel `K0` in dimension `d`,
/// `first_moment` and `second_moment` are per-coordinate values
/// (`∫ z_j K0(z) dz` and `∫ z_j² K0(z) dz`), which are the same for every `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants<T> {
    pub integral: T,
    pub first_moment: T,
    pub second_moment: T,
    pub squared_integral: T,
}

/// One Epanechnikov factor on `[-1/2, 1/2]`.
#[inline]
pub(crate) fn k0_factor<T: Scalar>(u: T) -> T {
    let half = T::lit(0.5);
    if u.abs() > half {
        T::zero()
    } else {
        T::lit(1.5) * (T::one() - T::lit(4.0) * u * u)
    }
}

/// `K0((a − b) · inv_b0)` for two points of equal length, short-circuiting outside the support.
#[inline]
pub(crate) fn k0_scaled_diff<T: Scalar>(a: &[T], b: &[T], inv_b0: T) -> T {
    let mut w = T::one();
    for (&aj, &bj) in a.iter().zip(b) {
        let f = k0_factor((aj - bj) * inv_b0);
        if f == T::zero() {
            return T::zero();
        }
        w = w * f;
    }
    w
}

#[inline]
pub(crate) fn k1_value<T: Scalar>(v: T) -> T {
    if v.abs() >= T::one() {
        return T::zero();
    }
    let s = T::one() - v * v;
    let s2 = s * s;
    T::lit(K1_NORM) * s2 * s2
}

#[inline]
fn k1_derivative<T: Scalar>(v: T, order: u32) -> T {
    if v.abs() >= T::one() {
        return T::zero();
    }
    let c = T::lit(K1_NORM);
    let s = T::one() - v * v;
    match order {
        0 => k1_value(v),
        1 => -T::lit(8.0) * c * v * s * s * s,
        2 => -T::lit(8.0) * c * s * s * (T::one() - T::lit(7.0) * v * v),
        _ => -T::lit(48.0) * c * v * s * (T::lit(7.0) * v * v - T::lit(3.0)),
    }
}

pub fn eval_k0<T: Scalar>(z: &[T], spec: &KernelSpec) -> Result<T> {
    if spec.family != KernelFamily::Epanechnikov01 {
        return Err(Error::InvalidParameter("eval_k0 requires the Epanechnikov01 family".into()));
    }
    if z.len() != spec.dimension {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension,
            found: z.len(),
        });
    }
    Ok(z.iter().fold(T::one(), |acc, &u| acc * k0_factor(u)))
}

/// `K1` (order 0) or its analytic derivative of order 1, 2 or 3.
pub fn eval_k1<T: Scalar>(v: T, order: u32) -> Result<T> {
    if order > 3 {
        return Err(Error::InvalidDerivativeOrder(order));
    }
    Ok(k1_derivative(v, order))
}

/// Moment constants by composite Simpson quadrature with 2048 panels on the support.
pub fn compute_constants<T: Scalar>(spec: &KernelSpec) -> KernelConstants<T> {
    let h = T::lit(spec.support_halfwidth);
    let integrate = |f: &dyn Fn(T) -> T| simpson(f, -h, h, DEFAULT_PANELS);
    match spec.family {
        KernelFamily::QuarticSmooth => KernelConstants {
            integral: integrate(&|v| k1_value(v)),
            first_moment: integrate(&|v| v * k1_value(v)),
            second_moment: integrate(&|v| v * v * k1_value(v)),
            squared_integral: integrate(&|v| {
                let k = k1_value(v);
                k * k
            }),
        },
        KernelFamily::Epanechnikov01 => {
            // the product kernel factorizes, so d-dimensional moments are
            // products of one-dimensional ones
            let d = spec.dimension as i32;
            let mass = integrate(&|u| k0_factor(u));
            let first = integrate(&|u| u * k0_factor(u));
            let second = integrate(&|u| u * u * k0_factor(u));
            let sq = integrate(&|u| {
                let k = k0_factor(u);
                k * k
            });
            KernelConstants {
                integral: mass.powi(d),
                first_moment: first * mass.powi(d - 1),
                second_moment: second * mass.powi(d - 1),
                squared_integral: sq.powi(d),
            }
        }
    }
}

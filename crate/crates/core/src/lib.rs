//! Kernel estimation of the density of regression errors from estimated residuals.
//!
//! The estimator works in two steps. First a leave-one-out Nadaraya–Watson fit
//! with a product kernel `K0` and bandwidth `b0` produces residuals
//! `ε̂ᵢ = Yᵢ − m̂ᵢ(Xᵢ)`. Second, the residuals of observations whose covariate
//! lies inside an inner trimming box are smoothed with a univariate `C³` kernel
//! `K1` and bandwidth `b1`.
//!
//! Module map:
//!
//! * [`kernels`]: `K0` (product Epanechnikov on `[-1/2, 1/2]^d`) and `K1`
//!   (`(315/256)(1 − v²)⁴`) with analytic derivatives and moment constants.
//! * [`regression`]: covariate density, Nadaraya–Watson fits and residual extraction.
//! * [`errdensity`]: the feasible two-step estimator, the oracle estimator on true
//!   errors, the naive conditional estimator, and integrated squared error.
//! * [`bandwidth`]: risk surrogates and the closed-form / numeric bandwidth rules.
//! * [`montecarlo`]: synthetic models and the rate, gap, normality and sup-norm experiments.
//! * [`cli_io`]: configuration, CSV ingestion and result serialization behind the `errdens` CLI.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below name the `f64` instantiations used by the experiments and the CLI.

// `!(a < b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidth;
pub mod cli_io;
pub mod errdensity;
mod error;
pub mod kernels;
pub mod montecarlo;
pub mod quadrature;
pub mod regression;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Sample64 = regression::Sample<f64>;
pub type Sample32 = regression::Sample<f32>;
pub type TrimRegion64 = regression::TrimRegion<f64>;
pub type TrimRegion32 = regression::TrimRegion<f32>;
pub type ResidualSet64 = regression::ResidualSet<f64>;
pub type ResidualSet32 = regression::ResidualSet<f32>;
pub type DensityEstimate64 = errdensity::DensityEstimate<f64>;
pub type DensityEstimate32 = errdensity::DensityEstimate<f32>;
pub type KernelConstants64 = kernels::KernelConstants<f64>;
pub type KernelConstants32 = kernels::KernelConstants<f32>;
pub type BandwidthPlan64 = bandwidth::BandwidthPlan<f64>;
pub type BandwidthPlan32 = bandwidth::BandwidthPlan<f32>;

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::quadrature::simpson;
use crate::regression::Sample;
use crate::{Error, Result};

use super::stats::normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MFamily {
    /// `m(x) = 1`
    Constant,
    /// `m(x) = Σ x_j`
    Linear,
    /// `m(x) = Π sin(2π x_j)`
    SineProduct,
}

impl MFamily {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            MFamily::Constant => 1.0,
            MFamily::Linear => x.iter().sum(),
            MFamily::SineProduct => x.iter().map(|&v| (2.0 * PI * v).sin()).product(),
        }
    }
}

const TN_MEAN: f64 = 0.5;
const TN_SD: f64 = 0.2;

/// Covariate distributions, all supported on `[0, 1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GFamily {
    UniformBox,
    /// Independent `N(0.5, 0.2²)` coordinates truncated to `[0, 1]`.
    TruncatedNormal,
}

impl GFamily {
    pub fn density(self, x: &[f64]) -> f64 {
        if x.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return 0.0;
        }
        match self {
            GFamily::UniformBox => 1.0,
            GFamily::TruncatedNormal => {
                let z = normal_cdf((1.0 - TN_MEAN) / TN_SD) - normal_cdf(-TN_MEAN / TN_SD);
                x.iter()
                    .map(|&v| {
                        let u = (v - TN_MEAN) / TN_SD;
                        (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * TN_SD * z)
                    })
                    .product()
            }
        }
    }

    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            GFamily::UniformBox => rng.random::<f64>(),
            GFamily::TruncatedNormal => loop {
                let z: f64 = StandardNormal.sample(rng);
                let v = TN_MEAN + TN_SD * z;
                if (0.0..=1.0).contains(&v) {
                    break v;
                }
            },
        }
    }
}

const MIX_MEAN: f64 = 0.8;
const MIX_SD: f64 = 0.6;
const T_DOF: f64 = 8.0;

/// Centered unit-variance error laws with finite sixth moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorFamily {
    StdNormal,
    /// `½N(−0.8, 0.6²) + ½N(0.8, 0.6²)`
    MixtureOfTwoNormals,
    /// Student t with 8 degrees of freedom scaled by `√(6/8)`.
    ScaledStudentT8,
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

impl ErrorFamily {
    /// Density at unit scale.
    pub fn pdf(self, e: f64) -> f64 {
        match self {
            ErrorFamily::StdNormal => phi(e),
            ErrorFamily::MixtureOfTwoNormals => {
                0.5 * (phi((e - MIX_MEAN) / MIX_SD) + phi((e + MIX_MEAN) / MIX_SD)) / MIX_SD
            }
            ErrorFamily::ScaledStudentT8 => {
                // (1 + e²/6)^(-9/2) · 35 / (32 √6)
                35.0 / (32.0 * 6f64.sqrt()) * (1.0 + e * e / 6.0).powf(-4.5)
            }
        }
    }

    /// Second derivative of the unit-scale density.
    pub fn pdf_d2(self, e: f64) -> f64 {
        match self {
            ErrorFamily::StdNormal => (e * e - 1.0) * phi(e),
            ErrorFamily::MixtureOfTwoNormals => {
                let s = MIX_SD;
                let part = |z: f64| (z * z - 1.0) * phi(z) / (s * s * s);
                0.5 * (part((e - MIX_MEAN) / s) + part((e + MIX_MEAN) / s))
            }
            ErrorFamily::ScaledStudentT8 => {
                let (a, p) = (1.0 / 6.0, 4.5);
                let c = 35.0 / (32.0 * 6f64.sqrt());
                let q = 1.0 + a * e * e;
                c * (-2.0 * a * p * q.powf(-p - 1.0) + 4.0 * a * a * p * (p + 1.0) * e * e * q.powf(-p - 2.0))
            }
        }
    }

    /// `∫ (f'')²` at unit scale.
    pub fn curvature(self) -> f64 {
        match self {
            ErrorFamily::StdNormal => 3.0 / (8.0 * PI.sqrt()),
            other => simpson(
                |e: f64| {
                    let v = other.pdf_d2(e);
                    v * v
                },
                -60.0,
                60.0,
                120_000,
            ),
        }
    }

    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            ErrorFamily::StdNormal => StandardNormal.sample(rng),
            ErrorFamily::MixtureOfTwoNormals => {
                let z: f64 = StandardNormal.sample(rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * MIX_MEAN + MIX_SD * z
            }
            ErrorFamily::ScaledStudentT8 => {
                let t = StudentT::new(T_DOF).expect("valid degrees of freedom");
                t.sample(rng) * ((T_DOF - 2.0) / T_DOF).sqrt()
            }
        }
    }
}

/// Data-generating process `Y = m(X) + σ ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub m_family: MFamily,
    pub g_family: GFamily,
    pub f_family: ErrorFamily,
    pub noise_scale: f64,
    pub seed: u64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("model dimension must be >= 1".into()));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_scale must be finite and >= 0, got {}",
                self.noise_scale
            )));
        }
        Ok(())
    }

    /// Density of the scaled error `σ ε`; `NaN` when `σ = 0`.
    pub fn error_pdf(&self, e: f64) -> f64 {
        let s = self.noise_scale;
        if s == 0.0 {
            return f64::NAN;
        }
        self.f_family.pdf(e / s) / s
    }

    pub fn error_pdf_d2(&self, e: f64) -> f64 {
        let s = self.noise_scale;
        if s == 0.0 {
            return f64::NAN;
        }
        self.f_family.pdf_d2(e / s) / (s * s * s)
    }

    /// `∫ (f'')²` of the scaled error density.
    pub fn error_curvature(&self) -> f64 {
        self.f_family.curvature() / self.noise_scale.powi(5)
    }

    /// Generator for one replication: ChaCha8 keyed by `seed` on stream `stream`.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Stream id of replication `rep` at sample size `n`.
pub fn stream_id(n: usize, rep: usize) -> u64 {
    ((n as u64) << 32) | rep as u64
}

/// Draws `n` observations on stream 0; returns the sample and the latent errors.
pub fn simulate(spec: &ModelSpec, n: usize) -> Result<(Sample<f64>, Vec<f64>)> {
    simulate_stream(spec, n, 0)
}

pub fn simulate_stream(spec: &ModelSpec, n: usize, stream: u64) -> Result<(Sample<f64>, Vec<f64>)> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let mut rng = spec.rng(stream);
    let d = spec.d;
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    for _ in 0..n {
        let start = x.len();
        for _ in 0..d {
            x.push(spec.g_family.draw(&mut rng));
        }
        let e = spec.noise_scale * spec.f_family.draw(&mut rng);
        y.push(spec.m_family.eval(&x[start..]) + e);
        errors.push(e);
    }
    Ok((Sample::new(x, y, d)?, errors))
}

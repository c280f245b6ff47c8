//! Small summary statistics used by the experiments.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Median of the finite values; `NaN` if there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn loglog_slope(label: &str, x: &[f64], y: &[f64]) -> SlopeFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = mean(&lx);
    let my = mean(&ly);
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let std_error = if k > 2.0 {
        (ssr / (k - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    SlopeFit {
        label: label.to_string(),
        slope,
        intercept,
        std_error,
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and `N(0, 1)`.
pub fn ks_distance_normal(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// True when every element is strictly below its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_odd_and_nan() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[f64::NAN, 1.0, 5.0]), 3.0);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn exact_power_law_slope() {
        let x = [10.0, 100.0, 1000.0, 10000.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.4)).collect();
        let fit = loglog_slope("t", &x, &y);
        assert!((fit.slope + 0.4).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.std_error < 1e-12);
    }

    #[test]
    fn ks_of_normal_quantiles_is_small() {
        // midpoint quantiles give the minimal distance 1/(2n)
        let n = 400;
        let q: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        assert!((ks_distance_normal(&q) - 0.5 / n as f64).abs() < 1e-9);
        let shifted: Vec<f64> = q.iter().map(|v| v + 1.0).collect();
        assert!(ks_distance_normal(&shifted) > 0.3);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        // statrs erfc is accurate to about 1e-12 here
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-11);
    }
}

//! Composite Newton–Cotes rules.

use crate::Scalar;

/// Panel count used for kernel moment checks.
pub const DEFAULT_PANELS: usize = 2048;

/// Composite Simpson rule on `[a, b]` with `panels` subintervals (rounded up to even).
pub fn simpson<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, panels: usize) -> T {
    let panels = panels.max(2) + panels % 2;
    let h = (b - a) / T::from_count(panels);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut acc = f(a) + f(b);
    for k in 1..panels {
        let x = a + h * T::from_count(k);
        acc = acc + if k % 2 == 1 { four * f(x) } else { two * f(x) };
    }
    acc * h / T::lit(3.0)
}

/// Trapezoid rule over tabulated `(x, y)` pairs; `x` need not be equispaced.
pub fn trapezoid<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let half = T::lit(0.5);
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) * half)
        .fold(T::zero(), |a, b| a + b)
}

/// `count` equispaced points from `min` to `max` inclusive.
pub fn linspace<T: Scalar>(min: T, max: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / T::from_count(count - 1);
            (0..count)
                .map(|k| {
                    if k == count - 1 {
                        max
                    } else {
                        min + step * T::from_count(k)
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 4);
        // ∫_{-1}^{2} = [x⁴/4 − x² + x] = (4 − 4 + 2) − (1/4 − 1 − 1)
        assert!((v - 3.75).abs() < 1e-14);
    }

    #[test]
    fn simpson_rounds_odd_panels_up() {
        let v = simpson(|x: f64| x * x, 0.0, 1.0, 3);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_of_constant() {
        let x = linspace(0.0, 2.0, 11);
        let y = vec![3.0; 11];
        assert!((trapezoid::<f64>(&x, &y) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn linspace_endpoints_exact() {
        let g = linspace(-1.3f64, 2.7, 17);
        assert_eq!(g.len(), 17);
        assert_eq!(g[0], -1.3);
        assert_eq!(g[16], 2.7);
    }
}

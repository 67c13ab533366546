//! Composite Simpson quadrature and fourth-order finite differences on uniform grids.

use std::ops::{Add, Mul, Sub};

use crate::densemat::C64;
use crate::error::{Error, Result};

/// Error estimates above this trigger [`Error::QuadratureTooCoarse`].
pub const QUADRATURE_LIMIT: f64 = 1e-10;

pub trait Sample: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
    fn zero() -> Self;
}

impl Sample for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn zero() -> Self {
        0.0
    }
}

impl Sample for C64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
}

/// Simpson's rule on `[a, b]` with the midpoint.
pub fn simpson<T: Sample>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> T {
    let m = 0.5 * (a + b);
    (f(a) + f(m) * 4.0 + f(b)) * ((b - a) / 6.0)
}

/// Running integrals `∫_{nodes[0]}^{nodes[k]} f` for a function evaluable anywhere.
///
/// Each interval uses Simpson's rule on two half-intervals; the Richardson estimate
/// `Σ |S_half − S_full| / 15` is returned alongside.
pub fn cumulative_simpson_fn<T: Sample>(f: impl Fn(f64) -> T, nodes: &[f64]) -> (Vec<T>, f64) {
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = T::zero();
    let mut estimate = 0.0;
    out.push(acc);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 0.5 * (a + b);
        let full = simpson(&f, a, b);
        let half = simpson(&f, a, m) + simpson(&f, m, b);
        estimate += (half - full).magnitude() / 15.0;
        acc = acc + half;
        out.push(acc);
    }
    (out, estimate)
}

/// Running integrals of grid samples with spacing `dt`.
///
/// Even nodes use composite Simpson; odd nodes add the quadratic-interpolant
/// rule over the last interval. The error estimate compares Simpson on the full
/// grid with Simpson on every other node over the longest prefix divisible by four.
pub fn cumulative_simpson_samples<T: Sample>(values: &[T], dt: f64) -> Result<(Vec<T>, f64)> {
    let n = values.len();
    if n < 3 {
        return Err(Error::GridTooShort { nodes: n, required: 3 });
    }
    let mut out = vec![T::zero(); n];
    for k in (2..n).step_by(2) {
        out[k] = out[k - 2] + (values[k - 2] + values[k - 1] * 4.0 + values[k]) * (dt / 3.0);
    }
    // first interval from the leading three samples
    out[1] = (values[0] * 5.0 + values[1] * 8.0 - values[2]) * (dt / 12.0);
    for k in (3..n).step_by(2) {
        out[k] = out[k - 1] + (values[k - 2] * -1.0 + values[k - 1] * 8.0 + values[k] * 5.0) * (dt / 12.0);
    }
    let m = (n - 1) / 4 * 4;
    let estimate = if m >= 4 {
        let coarse = (0..m / 4).fold(T::zero(), |acc, j| {
            let k = 4 * j;
            acc + (values[k] + values[k + 2] * 4.0 + values[k + 4]) * (2.0 * dt / 3.0)
        });
        (out[m] - coarse).magnitude() / 15.0
    } else {
        0.0
    };
    Ok((out, estimate))
}

pub fn check_estimate(estimate: f64, scale: f64) -> Result<()> {
    let limit = QUADRATURE_LIMIT * scale.max(1.0);
    if estimate > limit || !estimate.is_finite() {
        Err(Error::QuadratureTooCoarse { estimate, limit })
    } else {
        Ok(())
    }
}

/// Fourth-order central difference at interior index `k` (needs `2 ≤ k ≤ len − 3`).
pub fn central_difference<T: Sample>(values: &[T], k: usize, dt: f64) -> T {
    (values[k - 2] - values[k - 1] * 8.0 + values[k + 1] * 8.0 - values[k + 2]) * (1.0 / (12.0 * dt))
}

/// Fourth-order first derivative at every node; one-sided five-point stencils at the ends.
pub fn derivative_series<T: Sample>(values: &[T], dt: f64) -> Result<Vec<T>> {
    let n = values.len();
    if n < 5 {
        return Err(Error::GridTooShort { nodes: n, required: 5 });
    }
    let s = 1.0 / (12.0 * dt);
    let v = values;
    let mut out = Vec::with_capacity(n);
    out.push((v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) * s);
    out.push((v[0] * -3.0 - v[1] * 10.0 + v[2] * 18.0 - v[3] * 6.0 + v[4]) * s);
    for k in 2..n - 2 {
        out.push(central_difference(v, k, dt));
    }
    let e = n - 1;
    out.push((v[e] * 3.0 + v[e - 1] * 10.0 - v[e - 2] * 18.0 + v[e - 3] * 6.0 - v[e - 4]) * s);
    out.push((v[e] * 25.0 - v[e - 1] * 48.0 + v[e - 2] * 36.0 - v[e - 3] * 16.0 + v[e - 4] * 3.0) * s);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_for_cubics() {
        let f = |t: f64| 1.0 + 2.0 * t - t * t + 0.5 * t * t * t;
        let exact = |t: f64| t + t * t - t * t * t / 3.0 + t.powi(4) / 8.0;
        let nodes: Vec<f64> = (0..=7).map(|k| k as f64 * 0.3).collect();
        let (cum, est) = cumulative_simpson_fn(f, &nodes);
        for (c, &t) in cum.iter().zip(&nodes) {
            assert!((c - exact(t)).abs() < 1e-13);
        }
        assert!(est < 1e-14);

        let samples: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
        let (cum, _) = cumulative_simpson_samples(&samples, 0.3).unwrap();
        for (k, (c, &t)) in cum.iter().zip(&nodes).enumerate() {
            // odd nodes use the quadratic rule, exact only to second degree
            let tol = if k % 2 == 0 { 1e-13 } else { 3e-3 };
            assert!((c - exact(t)).abs() < tol, "k={k}");
        }
    }

    #[test]
    fn sample_quadrature_converges_at_fourth_order() {
        let err = |steps: usize| {
            let dt = 1.0 / steps as f64;
            let v: Vec<f64> = (0..=steps).map(|k| (k as f64 * dt).cos()).collect();
            let (cum, _) = cumulative_simpson_samples(&v, dt).unwrap();
            cum.iter()
                .enumerate()
                .map(|(k, c)| (c - (k as f64 * dt).sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(50) / err(100);
        assert!(ratio > 7.0, "ratio {ratio}");
    }

    #[test]
    fn derivative_is_fourth_order_everywhere() {
        let dt = 1e-2;
        let v: Vec<C64> = (0..40).map(|k| C64::new(0.0, k as f64 * dt).exp()).collect();
        let d = derivative_series(&v, dt).unwrap();
        for (k, dk) in d.iter().enumerate() {
            let want = C64::new(0.0, 1.0) * v[k];
            assert!((dk - want).norm() < 1e-8, "k={k}");
        }
        assert!(derivative_series(&v[..4], dt).is_err());
    }
}

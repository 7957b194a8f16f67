//! One-dimensional quadrature rules used by the constant and local-factor code.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values a quadrature rule can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Result of a refinement-based quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    /// Difference between the last two refinement levels.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Adaptive Simpson on `[a, b]`: each panel is halved until its two halves
/// agree with the parent to `15 * tol_local`, then Richardson-corrected.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<Quadrature<f64>> {
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut state = SimpsonState {
        evaluations: 3,
        error: 0.0,
        exhausted: false,
    };
    let value = simpson_step(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut state);
    if state.exhausted {
        return Err(Error::accuracy(
            format!("adaptive Simpson hit depth {max_depth} on [{a}, {b}]"),
            state.error,
        ));
    }
    Ok(Quadrature {
        value,
        error_estimate: state.error,
        evaluations: state.evaluations,
    })
}

struct SimpsonState {
    evaluations: usize,
    error: f64,
    exhausted: bool,
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    state: &mut SimpsonState,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    state.evaluations += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        state.error += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        state.exhausted = true;
        state.error += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, state)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, state)
}

/// Romberg integration: dyadic trapezoid refinement with Richardson extrapolation.
///
/// Stops when two successive diagonal entries differ by less than `tol`.
pub fn romberg<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_levels: usize,
) -> Result<Quadrature<f64>> {
    let mut prev_row: Vec<f64> = vec![0.5 * (b - a) * (f(a) + f(b))];
    let mut evaluations = 2;
    let mut last_err = f64::INFINITY;
    for level in 1..=max_levels {
        let n_new = 1usize << (level - 1);
        let h = (b - a) / (1usize << level) as f64;
        let mut fresh = 0.0;
        for k in 0..n_new {
            fresh += f(a + (2 * k + 1) as f64 * h);
        }
        evaluations += n_new;
        let mut row = Vec::with_capacity(level + 1);
        row.push(0.5 * prev_row[0] + h * fresh);
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let r = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(r);
        }
        last_err = (row[level] - prev_row[level - 1]).abs();
        if level >= 4 && last_err < tol {
            return Ok(Quadrature {
                value: row[level],
                error_estimate: last_err,
                evaluations,
            });
        }
        prev_row = row;
    }
    Err(Error::accuracy(
        format!("Romberg did not converge in {max_levels} levels on [{a}, {b}]"),
        last_err,
    ))
}

/// Mean of a `2*pi`-periodic function over `[-pi, pi]` by the trapezoid rule.
///
/// Starts from `initial_nodes` equispaced nodes and doubles (reusing the old
/// nodes) until successive means differ by at most `tol * max(1, |mean|)`.
/// For analytic periodic integrands the error decays geometrically in the
/// node count, so the successive difference is a conservative estimate.
pub fn periodic_mean<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    initial_nodes: usize,
    tol: f64,
    max_nodes: usize,
) -> Result<Quadrature<T>> {
    let n0 = initial_nodes.max(2);
    let mut n = n0;
    let mut sum = T::zero();
    for k in 0..n {
        sum = sum + f(-PI + 2.0 * PI * k as f64 / n as f64);
    }
    let mut mean = sum * (1.0 / n as f64);
    let mut evaluations = n;
    loop {
        if 2 * n > max_nodes {
            return Err(Error::accuracy(
                format!("periodic trapezoid exceeded {max_nodes} nodes"),
                f64::NAN,
            ));
        }
        let h = 2.0 * PI / (2 * n) as f64;
        let mut fresh = T::zero();
        for k in 0..n {
            fresh = fresh + f(-PI + (2 * k + 1) as f64 * h);
        }
        evaluations += n;
        sum = sum + fresh;
        n *= 2;
        let refined = sum * (1.0 / n as f64);
        let diff = (refined - mean).magnitude();
        mean = refined;
        if diff <= tol * refined.magnitude().max(1.0) {
            return Ok(Quadrature {
                value: mean,
                error_estimate: diff,
                evaluations,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_exp() {
        let q = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12, 30).unwrap();
        assert!((q.value - 4.0).abs() < 1e-12);
        let q = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-13, 40).unwrap();
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn simpson_reports_exhaustion() {
        let err = adaptive_simpson(|x: f64| x.sqrt().recip(), 1e-300, 1.0, 1e-14, 3).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }

    #[test]
    fn romberg_smooth() {
        let q = romberg(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-13, 25).unwrap();
        assert!((q.value - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_mean_bessel_integral() {
        // (1/2pi) int exp(t cos theta) = I0(t); I0(1) from its Taylor series.
        let i0_1: f64 = (0..30)
            .map(|n| {
                let f: f64 = (1..=n).map(|k| k as f64).product();
                0.25f64.powi(n) / (f * f)
            })
            .sum();
        let q = periodic_mean(|t: f64| t.cos().exp(), 8, 1e-15, 1 << 16).unwrap();
        assert!((q.value - i0_1).abs() < 1e-14);
        assert!(q.evaluations <= 64);
    }

    #[test]
    fn periodic_mean_complex_constant_term() {
        let q = periodic_mean(
            |t: f64| Complex64::new(0.0, t).exp() * 3.0 + Complex64::new(1.0, 2.0),
            16,
            1e-14,
            1 << 10,
        )
        .unwrap();
        assert!((q.value - Complex64::new(1.0, 2.0)).norm() < 1e-14);
    }
}

//! Purely imaginary moments `sum_n d_{s/2i}(n) d_{-s/2i}(n) / n^2 = prod_p E_p(s)`.
//!
//! `E_p(s)` is the circle mean of `g_s(theta) = exp(s * sum_n sin(n theta) / (n p^n))`.
//! For small primes it is integrated numerically; for large primes
//! `log E_p(s) = log I0(s/p) + O(s^2/p^4)`, with the remainder bounded
//! explicitly and folded into the reported error.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::{arctan_weight, for_each_prime_in, prime_power_tail_bound};
use crate::quadrature::periodic_mean;
use crate::special::{log_i0_unchecked, ConstantsBundle};
use crate::summation::NeumaierSum;

/// Smallest `s` accepted by [`exact_imaginary_moment`].
pub const MIN_EXACT_S: f64 = 1.0;
/// Largest `s` accepted by [`exact_imaginary_moment`].
pub const MAX_EXACT_S: f64 = 1e4;
/// Largest prime cutoff for the exact product.
pub const PRIME_CUTOFF_CAP: u64 = 200_000_000;

const QUADRATURE_START_NODES: usize = 256;
const QUADRATURE_MAX_NODES: usize = 1 << 24;
/// Primes at or below this bound are always integrated numerically.
const MIN_QUADRATURE_PRIME: u64 = 1000;

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!(
            "s must be positive and finite, got {s}"
        )));
    }
    Ok(())
}

/// `log g_s(theta) = s * Im(-log(1 - e^{i theta}/p))`.
#[inline]
fn log_g(p: f64, s: f64, theta: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    s * sin.atan2(p - cos)
}

/// `g_s(theta)` for a prime `p`, `s > 0`, `theta` in `[-pi, pi]`.
pub fn g_s(p: u64, s: f64, theta: f64) -> Result<f64> {
    check_s(s)?;
    if !(-PI..=PI).contains(&theta) {
        return Err(Error::domain(format!(
            "theta must lie in [-pi, pi], got {theta}"
        )));
    }
    Ok(log_g(p as f64, s, theta).exp())
}

/// Location and size of the extremes of `g_s` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GExtremes {
    pub p: u64,
    pub s: f64,
    /// `arccos(1/p)`; the maximum sits at `theta_p`, the minimum at `-theta_p`.
    pub theta_p: f64,
    pub max_value: f64,
    pub min_value: f64,
}

pub fn g_extremes(p: u64, s: f64) -> Result<GExtremes> {
    check_s(s)?;
    let peak = s * arctan_weight(p);
    Ok(GExtremes {
        p,
        s,
        theta_p: (1.0 / p as f64).acos(),
        max_value: peak.exp(),
        min_value: (-peak).exp(),
    })
}

/// `log E_p(s)` and its estimated quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFactor {
    pub p: u64,
    pub log_value: f64,
    pub error: f64,
    pub nodes: usize,
}

/// `log E_p(s)` by the periodic trapezoid rule, scaled by the peak value so
/// that large `s` cannot overflow.
pub fn log_e_p(s: f64, p: u64, tol: f64) -> Result<LogFactor> {
    check_s(s)?;
    let pf = p as f64;
    let peak = s * arctan_weight(p);
    let q = periodic_mean(
        |theta| (log_g(pf, s, theta) - peak).exp(),
        QUADRATURE_START_NODES,
        tol,
        QUADRATURE_MAX_NODES,
    )?;
    Ok(LogFactor {
        p,
        log_value: peak + q.value.ln(),
        error: q.error_estimate / q.value,
        nodes: q.evaluations,
    })
}

/// `E_p(s)`; overflows to infinity for very large `s / p`, use [`log_e_p`] there.
pub fn e_p(s: f64, p: u64, tol: f64) -> Result<f64> {
    Ok(log_e_p(s, p, tol)?.log_value.exp())
}

/// Bound on `|log E_p(s) - log I0(s/p)|` for `p > s`.
///
/// Write `log g_s = a sin(theta) + r(theta)` with `a = s/p` and
/// `|r| <= rho = s / (2p(p-1))`. The first-order term `E[e^{a sin} r]` only
/// sees the odd harmonics `n >= 3` and is at most
/// `(s/3) p^-3 p/(p-1) (a/2)^3/6 e^a`; the second-order remainder is at most
/// `rho^2 e^rho / 2`, both relative to `I0(a)`.
fn bessel_replacement_bound(s: f64, p: f64) -> f64 {
    let a = s / p;
    let rho = s / (2.0 * p * (p - 1.0));
    let first = s / 3.0 * p.powi(-3) * p / (p - 1.0) * (a / 2.0).powi(3) / 6.0 * a.exp();
    let second = 0.5 * rho * rho * rho.exp();
    let delta = first + second;
    delta / (1.0 - delta)
}

/// `log prod_{p <= cutoff} E_p(s)` and a bound on its distance to the full product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImaginaryMomentEval {
    pub s: f64,
    /// Largest prime included.
    pub cutoff: u64,
    pub log_value: f64,
    /// Bounds the omitted primes plus the Bessel replacement for large primes.
    pub tail_bound: f64,
    /// Accumulated quadrature error estimate for the small primes.
    pub quadrature_error: f64,
}

/// Exact `log sum_n d_{s/2i}(n) d_{-s/2i}(n) / n^2` for `1 <= s <= 10^4`, to absolute accuracy `tol`.
///
/// The prime cutoff starts at `max(2 s^2, 10^4)` and grows until the omitted
/// tail `sum_{p > P} s^2 / (2 p^2)` (each `log E_p(s) <= log I0(s/p) <= (s/p)^2/4`,
/// and `E_p >= 1` by Jensen) fits in half of `tol`.
pub fn exact_imaginary_moment(s: f64, tol: f64) -> Result<ImaginaryMomentEval> {
    if !(MIN_EXACT_S..=MAX_EXACT_S).contains(&s) {
        return Err(Error::domain(format!(
            "exact moment supports s in [{MIN_EXACT_S}, {MAX_EXACT_S}], got {s}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let omitted = |cutoff: f64| 0.5 * s * s * prime_power_tail_bound(cutoff, 2.0);
    let mut cutoff = (2.0 * s * s).max(1e4);
    while omitted(cutoff) > tol / 2.0 {
        if cutoff >= PRIME_CUTOFF_CAP as f64 {
            return Err(Error::accuracy(
                format!("prime cutoff for s = {s} would exceed {PRIME_CUTOFF_CAP}"),
                omitted(cutoff),
            ));
        }
        cutoff = (cutoff * 1.25).min(PRIME_CUTOFF_CAP as f64);
    }
    let cutoff = cutoff.ceil() as u64;
    let quadrature_limit = ((20.0 * s).ceil() as u64).max(MIN_QUADRATURE_PRIME);

    let mut small = Vec::new();
    let mut bessel_sum = NeumaierSum::new();
    let mut replacement = NeumaierSum::new();
    let mut largest = 2;
    for_each_prime_in(2, cutoff, |p| {
        largest = p;
        if p <= quadrature_limit {
            small.push(p);
        } else {
            let pf = p as f64;
            bessel_sum.add(log_i0_unchecked(s / pf));
            replacement.add(bessel_replacement_bound(s, pf));
        }
    });

    let quad_tol = (tol / (4.0 * small.len() as f64)).clamp(1e-14, 1e-8);
    let factors: Vec<LogFactor> = small
        .par_iter()
        .map(|&p| log_e_p(s, p, quad_tol))
        .collect::<Result<_>>()?;
    let mut total = NeumaierSum::new();
    let mut quadrature_error = 0.0;
    for f in &factors {
        total.add(f.log_value);
        quadrature_error += f.error;
    }
    total.merge(&bessel_sum);

    let tail_bound = omitted(cutoff as f64) + replacement.value();
    Ok(ImaginaryMomentEval {
        s,
        cutoff: largest,
        log_value: total.value(),
        tail_bound,
        quadrature_error,
    })
}

/// Three-term exponent `s log log s + C2 s + C1 s / log s`.
pub fn asymptotic_imaginary_moment(s: f64, constants: &ConstantsBundle) -> Result<f64> {
    if !(s >= 3.0) || !s.is_finite() {
        return Err(Error::domain(format!(
            "asymptotic exponent needs s >= 3, got {s}"
        )));
    }
    let log_s = s.ln();
    Ok(s * log_s.ln() + constants.c2 * s + constants.c1 * s / log_s)
}

/// `|log exact - exponent| * log^2 s / s`, the residual in units of the first omitted order.
pub fn normalized_residual(exact_log: f64, s: f64, constants: &ConstantsBundle) -> Result<f64> {
    let exponent = asymptotic_imaginary_moment(s, constants)?;
    let log_s = s.ln();
    Ok((exact_log - exponent).abs() * log_s * log_s / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_i0;

    #[test]
    fn g_at_zero_and_peak() {
        assert!((g_s(7, 3.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let peak = g_s(2, 1.0, PI / 3.0).unwrap();
        assert!((peak - (PI / 6.0).exp()).abs() < 1e-14);
        assert!((peak - 1.68809).abs() < 1e-5);
        assert!(g_s(2, 0.0, 0.1).is_err());
        assert!(g_s(2, 1.0, 3.5).is_err());
    }

    #[test]
    fn g_is_reciprocal_under_reflection() {
        for (p, s, theta) in [
            (2u64, 0.7, 0.3),
            (5, 11.0, -2.2),
            (101, 40.0, 1.1),
            (3, 2.0, PI),
        ] {
            let prod = g_s(p, s, theta).unwrap() * g_s(p, s, -theta).unwrap();
            assert!((prod - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn extremes_closed_form() {
        let e = g_extremes(2, 1.0).unwrap();
        assert!((e.max_value - (PI / 6.0).exp()).abs() < 1e-14);
        assert!((e.theta_p - PI / 3.0).abs() < 1e-15);
        let e = g_extremes(3, 2.0).unwrap();
        let expect = (2.0 * (1.0 / 8f64.sqrt()).atan()).exp();
        assert!((e.max_value / expect - 1.0).abs() < 1e-12);
        assert!((e.max_value * e.min_value - 1.0).abs() < 1e-12);
        assert!(e.theta_p > 0.0 && e.theta_p < PI / 2.0);
    }

    #[test]
    fn e_p_examples() {
        assert!((e_p(1e-8, 2, 1e-14).unwrap() - 1.0).abs() < 1e-6);
        let v = e_p(1.0, 97, 1e-14).unwrap();
        let i0 = bessel_i0(1.0 / 97.0).unwrap();
        assert!((v / i0 - 1.0).abs() < 0.01);
        let v = e_p(5.0, 2, 1e-14).unwrap();
        assert!(v <= (5.0 * (1.0 / 3f64.sqrt()).atan()).exp());
    }

    #[test]
    fn bessel_replacement_bound_covers_actual_gap() {
        for (s, p) in [(2.0, 41u64), (5.0, 101), (20.0, 401), (50.0, 1009)] {
            let exact = log_e_p(s, p, 1e-15).unwrap().log_value;
            let approx = log_i0_unchecked(s / p as f64);
            let bound = bessel_replacement_bound(s, p as f64);
            assert!((exact - approx).abs() <= bound, "s={s} p={p}");
        }
    }

    #[test]
    fn exact_moment_domain() {
        assert!(exact_imaginary_moment(0.5, 1e-3).is_err());
        assert!(exact_imaginary_moment(2e4, 1e-3).is_err());
        assert!(matches!(
            exact_imaginary_moment(1e4, 1e-6),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn asymptotic_exponent_at_e_to_e() {
        let consts = ConstantsBundle {
            c1: -1.1,
            c2: 0.3,
            gamma_euler: crate::special::EULER_GAMMA,
            tolerance_achieved: 0.0,
        };
        let s = std::f64::consts::E.exp();
        let v = asymptotic_imaginary_moment(s, &consts).unwrap();
        let expect = s * (1.0 + 0.3 - 1.1 / std::f64::consts::E);
        assert!((v - expect).abs() < 1e-12 * expect.abs());
        assert!(asymptotic_imaginary_moment(2.9, &consts).is_err());
    }
}

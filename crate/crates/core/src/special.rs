//! Modified Bessel function `I0`, the auxiliary `h(t)`, digamma on `(0, 1]`,
//! and the two constants `C1`, `C2` that govern the tail asymptotics.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::{self, prime_power_tail_bound};
use crate::quadrature::{adaptive_simpson, romberg};
use crate::summation::NeumaierSum;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Series/asymptotic crossover for `I0`.
const BESSEL_CROSSOVER: f64 = 30.0;
/// Largest argument for which `I0(t)` is returned unscaled.
const BESSEL_MAX_ARG: f64 = 700.0;

/// `sum_{n >= 1} (t/2)^{2n} / n!^2`, i.e. `I0(t) - 1`, kept separate so small `t` keeps full precision.
fn i0_series_minus_one(t: f64) -> f64 {
    let x = 0.25 * t * t;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut n = 1.0;
    loop {
        term *= x / (n * n);
        sum += term;
        if term <= 1e-17 * sum || term == 0.0 {
            return sum;
        }
        n += 1.0;
    }
}

/// `sqrt(2 pi t) e^{-t} I0(t)` from the Hankel expansion, summed until the
/// terms stop decreasing or drop below `1e-17`. Only meaningful for large `t`.
fn i0_scaled_asymptotic(t: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * t);
        if next >= term || next < 1e-17 {
            return sum + next;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
}

/// `I0(t)` for `0 <= t <= 700`.
pub fn bessel_i0(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("I0 needs t >= 0, got {t}")));
    }
    if t > BESSEL_MAX_ARG {
        return Err(Error::Overflow(format!(
            "I0({t}) overflows; use log_bessel_i0"
        )));
    }
    if t <= BESSEL_CROSSOVER {
        Ok(1.0 + i0_series_minus_one(t))
    } else {
        Ok(t.exp() * i0_scaled_asymptotic(t) / (2.0 * PI * t).sqrt())
    }
}

/// `log I0(t) - t`, computed without forming `log I0(t)` for large `t`.
fn log_i0_minus_t(t: f64) -> f64 {
    if t <= BESSEL_CROSSOVER {
        (i0_series_minus_one(t)).ln_1p() - t
    } else {
        i0_scaled_asymptotic(t).ln() - 0.5 * (2.0 * PI * t).ln()
    }
}

/// `log I0(t)` for any `t >= 0`.
pub fn log_bessel_i0(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("log I0 needs t >= 0, got {t}")));
    }
    Ok(log_i0_unchecked(t))
}

#[inline]
pub(crate) fn log_i0_unchecked(t: f64) -> f64 {
    if t <= BESSEL_CROSSOVER {
        i0_series_minus_one(t).ln_1p()
    } else {
        t + log_i0_minus_t(t)
    }
}

/// `h(t) = log I0(t)` on `[0, 1)` and `log I0(t) - t` on `[1, inf)`.
///
/// The two branches do not meet at `t = 1`; the point belongs to the second.
pub fn h(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("h needs t >= 0, got {t}")));
    }
    Ok(h_unchecked(t))
}

#[inline]
fn h_unchecked(t: f64) -> f64 {
    if t < 1.0 {
        log_i0_unchecked(t)
    } else {
        log_i0_minus_t(t)
    }
}

/// Digamma `psi(x)` on `(0, 1]`.
///
/// Shifts up by ten with `psi(x) = psi(x + 1) - 1/x`, then applies the
/// Stirling-type expansion, which at argument `>= 10` is good to ~1e-16.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::domain(format!(
            "digamma implemented on (0, 1], got {x}"
        )));
    }
    Ok(digamma_unchecked(x))
}

#[inline]
pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    const SHIFT: usize = 10;
    let mut shift = NeumaierSum::new();
    for k in 0..SHIFT {
        shift.add(1.0 / (x + k as f64));
    }
    let y = x + SHIFT as f64;
    let r = 1.0 / (y * y);
    // Bernoulli terms B_{2k} / (2k y^{2k}), k = 1..7
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    let asymptotic = y.ln() - 0.5 / y - series;
    asymptotic - shift.value()
}

/// A constant together with the bound on its numerical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantEval {
    pub value: f64,
    pub error_bound: f64,
}

/// Upper bound for `|int_T^inf h(t) dt / t^2|` from `|h(t)| <= log(10 pi t)`.
pub fn c1_tail_bound(t_max: f64) -> f64 {
    ((10.0 * PI * t_max).ln() + 1.0) / t_max
}

/// Integrand of `int_0^1 log I0(t) dt / t^2`, with its limit `1/4` at the origin.
fn c1_inner_integrand(t: f64) -> f64 {
    if t == 0.0 {
        0.25
    } else {
        i0_series_minus_one(t).ln_1p() / (t * t)
    }
}

/// Integrand of `int_1^inf h(t) dt / t^2` after `t = e^x`.
fn c1_outer_integrand(x: f64) -> f64 {
    h_unchecked(x.exp()) * (-x).exp()
}

/// Cut-off `X` in the log variable so that the dropped tail `int_{e^X}^inf` is below `budget`.
fn c1_log_cutoff(budget: f64) -> f64 {
    let mut x = 10.0;
    while c1_tail_bound(f64::exp(x)) > budget {
        x += 1.0;
    }
    x
}

fn check_c1_tol(tol: f64) -> Result<()> {
    if !(tol >= 1e-10) {
        return Err(Error::domain(format!(
            "C1 tolerance must be >= 1e-10, got {tol}"
        )));
    }
    Ok(())
}

/// `C1` by adaptive Simpson on both pieces.
pub fn compute_c1(tol: f64) -> Result<ConstantEval> {
    check_c1_tol(tol)?;
    let cutoff = c1_log_cutoff(tol / 10.0);
    let inner = adaptive_simpson(c1_inner_integrand, 0.0, 1.0, tol / 10.0, 40)?;
    let outer = adaptive_simpson(c1_outer_integrand, 0.0, cutoff, tol / 10.0, 40)?;
    let error_bound = inner.error_estimate + outer.error_estimate + c1_tail_bound(cutoff.exp());
    if error_bound > tol {
        return Err(Error::accuracy(
            "C1 Simpson error budget exceeded",
            error_bound,
        ));
    }
    Ok(ConstantEval {
        value: inner.value + outer.value,
        error_bound,
    })
}

/// `C1` by Romberg (dyadic trapezoid + Richardson); an independent check on [`compute_c1`].
pub fn compute_c1_romberg(tol: f64) -> Result<ConstantEval> {
    check_c1_tol(tol)?;
    let cutoff = c1_log_cutoff(tol / 10.0);
    let inner = romberg(c1_inner_integrand, 0.0, 1.0, tol / 10.0, 24)?;
    // split the long outer interval so the polynomial extrapolation sees smooth panels
    let mut value = inner.value;
    let mut error_bound = inner.error_estimate + c1_tail_bound(cutoff.exp());
    let panels = cutoff.ceil() as usize;
    for k in 0..panels {
        let a = k as f64 * cutoff / panels as f64;
        let b = (k + 1) as f64 * cutoff / panels as f64;
        let piece = romberg(c1_outer_integrand, a, b, tol / (10.0 * panels as f64), 24)?;
        value += piece.value;
        error_bound += piece.error_estimate;
    }
    if error_bound > tol {
        return Err(Error::accuracy(
            "C1 Romberg error budget exceeded",
            error_bound,
        ));
    }
    Ok(ConstantEval { value, error_bound })
}

/// `C2 = lim (sum_{p<=x} arctan(1/sqrt(p^2-1)) - log log x)`.
///
/// Evaluated through Mertens' identity `sum_{p<=x} 1/p - log log x -> gamma + sum_p (log(1 - 1/p) + 1/p)`,
/// which turns the limit into the absolutely convergent
/// `C2 = gamma + sum_p (arctan(1/sqrt(p^2-1)) + log(1 - 1/p))`.
/// Each term is at most `1/(2p(p-1))` in size, so the tail past `x` is bounded
/// by `x/(2(x-1)) * sum_{p>x} p^-2`.
pub fn compute_c2(tol: f64) -> Result<ConstantEval> {
    if !(tol >= 1e-8) {
        return Err(Error::domain(format!(
            "C2 tolerance must be >= 1e-8, got {tol}"
        )));
    }
    const CUTOFF_CAP: f64 = 2e8;
    let tail = |x: f64| 0.5 * x / (x - 1.0) * prime_power_tail_bound(x, 2.0);
    let mut x = 1e4;
    while tail(x) > tol / 2.0 {
        x *= 1.5;
        if x > CUTOFF_CAP {
            return Err(Error::accuracy(
                "C2 prime cutoff cap reached",
                tail(CUTOFF_CAP),
            ));
        }
    }
    let sieve = primes::primes_up_to(x as u64)?;
    let mut acc = NeumaierSum::new();
    acc.add(EULER_GAMMA);
    for &p in sieve.primes() {
        let u = 1.0 / p as f64;
        acc.add(u.asin() + (-u).ln_1p());
    }
    Ok(ConstantEval {
        value: acc.value(),
        error_bound: tail(x),
    })
}

/// Cached `C1`, `C2`, and `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsBundle {
    pub c1: f64,
    pub c2: f64,
    #[serde(rename = "gamma")]
    pub gamma_euler: f64,
    #[serde(rename = "tol")]
    pub tolerance_achieved: f64,
}

impl ConstantsBundle {
    /// Default accuracy of the shared bundle.
    pub const DEFAULT_TOL: f64 = 1e-8;

    pub fn compute(tol: f64) -> Result<Self> {
        let c1 = compute_c1(tol.max(1e-10))?;
        let c2 = compute_c2(tol)?;
        Ok(Self {
            c1: c1.value,
            c2: c2.value,
            gamma_euler: EULER_GAMMA,
            tolerance_achieved: c1.error_bound.max(c2.error_bound),
        })
    }

    /// Process-wide bundle computed once at [`Self::DEFAULT_TOL`].
    pub fn shared() -> &'static ConstantsBundle {
        static SHARED: OnceLock<ConstantsBundle> = OnceLock::new();
        SHARED.get_or_init(|| {
            ConstantsBundle::compute(Self::DEFAULT_TOL)
                .expect("default constant tolerance is attainable")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain Taylor series of I0, summed until the terms vanish.
    fn i0_taylor(t: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..400 {
            term *= (t / 2.0) * (t / 2.0) / (n as f64 * n as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        assert!((bessel_i0(1.0).unwrap() - 1.266_065_877_752_008_4).abs() < 1e-15);
        let i10 = bessel_i0(10.0).unwrap();
        let e10 = 10f64.exp();
        assert!(i10 >= e10 / (10.0 * PI * 10.0) && i10 <= e10);
    }

    #[test]
    fn bessel_crossover_consistent() {
        // both branches against the long Taylor sum around the switch point
        for t in [25.0, 29.9, 30.0, 30.1, 40.0, 60.0] {
            let rel = (bessel_i0(t).unwrap() / i0_taylor(t) - 1.0).abs();
            assert!(rel < 1e-12, "t={t} rel={rel}");
        }
    }

    #[test]
    fn bessel_domain_and_overflow() {
        assert!(matches!(bessel_i0(-1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i0(701.0), Err(Error::Overflow(_))));
        assert!(bessel_i0(700.0).unwrap().is_finite());
    }

    #[test]
    fn log_bessel_values_and_bounds() {
        assert_eq!(log_bessel_i0(0.0).unwrap(), 0.0);
        assert!((log_bessel_i0(1.0).unwrap() - 1.266_065_877_752_008_4f64.ln()).abs() < 1e-15);
        assert!((log_bessel_i0(1.0).unwrap() - 0.235914).abs() < 1e-6);
        for k in 0..400 {
            let t = 1.0 + k as f64 * 2.5;
            let v = log_bessel_i0(t).unwrap();
            assert!(v <= t && v >= t - (10.0 * PI * t).ln(), "t={t}");
        }
        // asymptotic branch against the series (log of Taylor sum) for moderate t
        for t in [31.0, 50.0, 200.0, 650.0] {
            let rel = (log_bessel_i0(t).unwrap() / i0_taylor(t).ln() - 1.0).abs();
            assert!(rel < 1e-10, "t={t}");
        }
        assert!(log_bessel_i0(1e6).unwrap().is_finite());
    }

    #[test]
    fn log_bessel_derivative_bounded_by_one() {
        let delta = 1e-4;
        for k in 0..=500 {
            let t = k as f64 * 0.1;
            let d = (log_bessel_i0(t + delta).unwrap() - log_bessel_i0(t).unwrap()) / delta;
            assert!(d.abs() <= 1.0 + 1e-6, "t={t} d={d}");
        }
    }

    #[test]
    fn h_piecewise() {
        assert_eq!(h(0.0).unwrap(), 0.0);
        let at_one = 1.266_065_877_752_008_4f64.ln() - 1.0;
        assert!((h(1.0).unwrap() - at_one).abs() < 1e-15);
        assert!((h(1.0).unwrap() + 0.764086).abs() < 1e-6);
        // the left branch just below 1 is log I0, not log I0 - 1
        assert!((h(1.0 - 1e-12).unwrap() - 1.266_065_877_752_008_4f64.ln()).abs() < 1e-10);
        let v = h(100.0).unwrap();
        assert!(v <= 0.0 && v >= -(10.0 * PI * 100.0).ln());
        assert!(h(-0.5).is_err());
    }

    #[test]
    fn digamma_classical_values() {
        let g = EULER_GAMMA;
        assert!((digamma(1.0).unwrap() + g).abs() < 1e-14);
        assert!((digamma(0.5).unwrap() - (-g - 2.0 * 2f64.ln())).abs() < 1e-14);
        let third = -g - 1.5 * 3f64.ln() - PI / (2.0 * 3f64.sqrt());
        assert!((digamma(1.0 / 3.0).unwrap() - third).abs() < 1e-14);
        assert!((third + 3.132_033_780_0).abs() < 1e-9);
        assert!(digamma(0.0).is_err() && digamma(1.5).is_err());
    }

    #[test]
    fn digamma_reflection() {
        for k in 1..=9 {
            let x = k as f64 / 10.0;
            let lhs = digamma(1.0 - x).unwrap() - digamma(x).unwrap();
            let rhs = PI / (PI * x).tan();
            assert!((lhs - rhs).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn digamma_small_argument() {
        // psi(x) = -1/x - gamma + (pi^2/6) x + O(x^2)
        let x = 1e-7;
        let approx = -1.0 / x - EULER_GAMMA + PI * PI / 6.0 * x;
        assert!((digamma(x).unwrap() - approx).abs() < 1e-9);
    }

    #[test]
    fn c1_inner_integrand_limit() {
        assert_eq!(c1_inner_integrand(0.0), 0.25);
        assert!((c1_inner_integrand(1e-4) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn c1_tail_bound_example() {
        let b = c1_tail_bound(1e4);
        assert!((b - 1.3e-3).abs() < 1e-4, "{b}");
    }

    #[test]
    fn c1_tolerance_domain() {
        assert!(matches!(compute_c1(1e-11), Err(Error::Domain(_))));
        assert!(matches!(compute_c2(1e-9), Err(Error::Domain(_))));
    }
}

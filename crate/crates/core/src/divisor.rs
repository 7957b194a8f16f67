//! Generalized divisor functions `d_z(n)` and their Euler products.
//!
//! The local factor at a prime `p` is
//! `F_p = sum_{a>=0} d_{z1}(p^a) d_{z2}(p^a) p^{-2 sigma a}`,
//! which also equals the mean over the circle of
//! `(1 - e^{i theta}/p^sigma)^{-z1} (1 - e^{-i theta}/p^sigma)^{-z2}`.
//! Both forms are implemented; the global sum takes whichever applies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::{factorize, for_each_prime_in, prime_power_tail_bound};
use crate::quadrature::periodic_mean;
use crate::summation::ComplexNeumaierSum;

/// Default bound on `|z|` accepted by [`ComplexOrder::new`].
pub const DEFAULT_MAX_ORDER: f64 = 1e4;
/// Largest `n` accepted by [`divisor_coeff`].
pub const MAX_FACTORABLE: u64 = 1_000_000_000_000;
/// Largest prime cutoff [`global_divisor_sum`] will use before giving up.
pub const DEFAULT_PRIME_CAP: u64 = 60_000_000;

const SERIES_MAX_TERMS: usize = 100_000;
const QUADRATURE_START_NODES: usize = 64;
const QUADRATURE_MAX_NODES: usize = 1 << 22;

/// The order `z` of `d_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexOrder(Complex64);

impl ComplexOrder {
    pub fn new(z: Complex64) -> Result<Self> {
        Self::with_limit(z, DEFAULT_MAX_ORDER)
    }

    pub fn with_limit(z: Complex64, max_modulus: f64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain(format!("order must be finite, got {z}")));
        }
        if z.norm() > max_modulus {
            return Err(Error::domain(format!(
                "|z| = {} exceeds the order limit {max_modulus}",
                z.norm()
            )));
        }
        Ok(Self(z))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn modulus(self) -> f64 {
        self.0.norm()
    }

    pub fn conj(self) -> Self {
        Self(self.0.conj())
    }
}

/// `d_z(p^a) = prod_{j<a} (z + j) / a!`.
pub fn prime_power_coeff(z: Complex64, a: u32) -> Complex64 {
    let mut d = Complex64::new(1.0, 0.0);
    for j in 0..a {
        d *= (z + j as f64) / (j + 1) as f64;
    }
    d
}

/// `d_z(n)` by multiplicativity over the factorization of `n`.
pub fn divisor_coeff(z: ComplexOrder, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("d_z(n) is defined for n >= 1"));
    }
    if n > MAX_FACTORABLE {
        return Err(Error::resource(format!(
            "n = {n} is beyond the factorization limit {MAX_FACTORABLE}"
        )));
    }
    Ok(factorize(n)
        .into_iter()
        .map(|(_, a)| prime_power_coeff(z.value(), a))
        .product())
}

/// How a local factor was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalFactorMethod {
    Series,
    Quadrature,
}

/// One prime's Euler factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalFactorEval {
    pub p: u64,
    pub sigma: f64,
    pub value: Complex64,
    pub truncation_error: f64,
    /// Series terms, or quadrature nodes.
    pub terms_used: usize,
    pub method: LocalFactorMethod,
}

/// Whether the power series is used for `(z1, z2, p, sigma)`: `p^{2 sigma} >= 2 max(|z1|, |z2|)`.
pub fn series_applicable(z1: ComplexOrder, z2: ComplexOrder, p: u64, sigma: f64) -> bool {
    (p as f64).powf(2.0 * sigma) >= 2.0 * z1.modulus().max(z2.modulus())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.5) || !sigma.is_finite() {
        return Err(Error::domain(format!("sigma must exceed 1/2, got {sigma}")));
    }
    Ok(())
}

/// Local factor as a truncated power series in `p^{-2 sigma}`.
///
/// The tail is bounded by the majorant built from `d_{|z|}(p^a) >= |d_z(p^a)|`,
/// whose consecutive ratio `(|z1|+a)(|z2|+a) / (a+1)^2 * p^{-2 sigma}` is
/// monotone in `a`.
pub fn local_factor_series(
    z1: ComplexOrder,
    z2: ComplexOrder,
    p: u64,
    sigma: f64,
    tol: f64,
) -> Result<LocalFactorEval> {
    check_sigma(sigma)?;
    if !series_applicable(z1, z2, p, sigma) {
        return Err(Error::domain(format!(
            "series needs p^(2 sigma) >= 2 max|z| (p = {p}, sigma = {sigma}); use the quadrature form"
        )));
    }
    let (w1, w2) = (z1.value(), z2.value());
    let (k1, k2) = (z1.modulus(), z2.modulus());
    let x = (p as f64).powf(-2.0 * sigma);

    let mut d1 = Complex64::new(1.0, 0.0);
    let mut d2 = Complex64::new(1.0, 0.0);
    let mut majorant = 1.0;
    let mut xa = 1.0;
    let mut sum = ComplexNeumaierSum::new();
    sum.add(Complex64::new(1.0, 0.0));
    for a in 0..SERIES_MAX_TERMS {
        let af = a as f64;
        let step = (k1 + af) * (k2 + af) / ((af + 1.0) * (af + 1.0)) * x;
        let next_majorant = majorant * step;
        // sup over b >= a+1 of the majorant ratio
        let g = |k: f64| ((k + af + 1.0) / (af + 2.0)).max(1.0);
        let ratio = g(k1) * g(k2) * x;
        if ratio < 1.0 {
            let tail = next_majorant / (1.0 - ratio);
            if tail <= tol {
                return Ok(LocalFactorEval {
                    p,
                    sigma,
                    value: sum.value(),
                    truncation_error: tail,
                    terms_used: a + 1,
                    method: LocalFactorMethod::Series,
                });
            }
        }
        d1 *= (w1 + af) / (af + 1.0);
        d2 *= (w2 + af) / (af + 1.0);
        xa *= x;
        sum.add(d1 * d2 * xa);
        majorant = next_majorant;
    }
    Err(Error::accuracy(
        format!("local factor series at p = {p} did not converge"),
        majorant,
    ))
}

/// Local factor as the circle mean of the product of principal complex powers.
///
/// `|e^{i theta} / p^sigma| < 1` keeps `1 - w` in the right half-plane, so the
/// principal logarithm is continuous along the whole circle.
pub fn local_factor_quadrature(
    z1: ComplexOrder,
    z2: ComplexOrder,
    p: u64,
    sigma: f64,
    tol: f64,
) -> Result<LocalFactorEval> {
    check_sigma(sigma)?;
    let (w1, w2) = (z1.value(), z2.value());
    let r = (p as f64).powf(-sigma);
    let one = Complex64::new(1.0, 0.0);
    let integrand = |theta: f64| {
        let w = Complex64::from_polar(r, theta);
        (-(w1 * (one - w).ln()) - w2 * (one - w.conj()).ln()).exp()
    };
    let q = periodic_mean(integrand, QUADRATURE_START_NODES, tol, QUADRATURE_MAX_NODES)?;
    Ok(LocalFactorEval {
        p,
        sigma,
        value: q.value,
        truncation_error: q.error_estimate,
        terms_used: q.evaluations,
        method: LocalFactorMethod::Quadrature,
    })
}

/// Local factor by the series when it applies, by quadrature otherwise.
pub fn local_factor(
    z1: ComplexOrder,
    z2: ComplexOrder,
    p: u64,
    sigma: f64,
    tol: f64,
) -> Result<LocalFactorEval> {
    if series_applicable(z1, z2, p, sigma) {
        local_factor_series(z1, z2, p, sigma, tol)
    } else {
        local_factor_quadrature(z1, z2, p, sigma, tol)
    }
}

/// `sum_n d_{z1}(n) d_{z2}(n) / n^{2 sigma}` as an Euler product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivisorSumEval {
    pub z1: Complex64,
    pub z2: Complex64,
    pub sigma: f64,
    pub value: Complex64,
    /// Bound on `|value - exact|`.
    pub error_bound: f64,
    /// Bound on `|log(prod_{p > P} F_p)|`.
    pub tail_bound: f64,
    pub prime_cutoff: u64,
}

/// Bound on `|sum_{p > cutoff} log F_p|`, or infinity when the majorant is not yet contracting.
fn log_tail_bound(k1: f64, k2: f64, sigma: f64, cutoff: f64) -> f64 {
    if k1 * k2 == 0.0 {
        return 0.0;
    }
    let x = cutoff.powf(-2.0 * sigma);
    let ratio = ((k1 + 1.0) / 2.0).max(1.0) * ((k2 + 1.0) / 2.0).max(1.0) * x;
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let first = k1 * k2 * x / (1.0 - ratio);
    if first >= 0.5 {
        return f64::INFINITY;
    }
    // |F_p - 1| <= k1 k2 p^{-2s} / (1 - ratio), and |log(1+u)| <= |u| / (1 - |u|)
    k1 * k2 / ((1.0 - ratio) * (1.0 - first)) * prime_power_tail_bound(cutoff, 2.0 * sigma)
}

/// Global divisor sum with relative accuracy `tol`, using [`DEFAULT_PRIME_CAP`].
pub fn global_divisor_sum(
    z1: ComplexOrder,
    z2: ComplexOrder,
    sigma: f64,
    tol: f64,
) -> Result<DivisorSumEval> {
    global_divisor_sum_with_cap(z1, z2, sigma, tol, DEFAULT_PRIME_CAP)
}

/// Global divisor sum; the prime cutoff `P` is the smallest (in steps of 1.25x)
/// for which the log-tail majorant is below `tol / 2`.
pub fn global_divisor_sum_with_cap(
    z1: ComplexOrder,
    z2: ComplexOrder,
    sigma: f64,
    tol: f64,
    prime_cap: u64,
) -> Result<DivisorSumEval> {
    check_sigma(sigma)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (k1, k2) = (z1.modulus(), z2.modulus());
    let mut cutoff = 1000.0f64;
    let mut tail = log_tail_bound(k1, k2, sigma, cutoff);
    while tail > tol / 2.0 {
        if cutoff >= prime_cap as f64 {
            return Err(Error::accuracy(
                format!("prime cutoff would exceed the cap {prime_cap}"),
                tail,
            ));
        }
        cutoff = (cutoff * 1.25).min(prime_cap as f64);
        tail = log_tail_bound(k1, k2, sigma, cutoff);
    }
    let cutoff = cutoff.ceil() as u64;

    // factors are O(1) for large p, so the absolute series tolerance is effectively relative
    let eval_factor = |p: u64| {
        if series_applicable(z1, z2, p, sigma) {
            local_factor_series(z1, z2, p, sigma, 1e-16)
        } else {
            local_factor_quadrature(z1, z2, p, sigma, 2e-15)
        }
    };
    let mut log_sum = ComplexNeumaierSum::new();
    let mut relative_error = 0.0;
    let mut batch = Vec::with_capacity(1 << 16);
    let mut first_error: Option<Error> = None;
    let mut flush = |batch: &mut Vec<u64>| {
        let evals: Vec<Result<LocalFactorEval>> =
            batch.par_iter().map(|&p| eval_factor(p)).collect();
        for eval in evals {
            match eval {
                Ok(f) => {
                    let norm = f.value.norm();
                    if norm == 0.0 {
                        first_error.get_or_insert(Error::domain(format!(
                            "local factor vanishes at p = {}",
                            f.p
                        )));
                        continue;
                    }
                    log_sum.add(f.value.ln());
                    relative_error += f.truncation_error / norm;
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        batch.clear();
    };
    for_each_prime_in(2, cutoff, |p| {
        batch.push(p);
        if batch.len() == batch.capacity() {
            flush(&mut batch);
        }
    });
    flush(&mut batch);
    if let Some(e) = first_error {
        return Err(e);
    }
    let value = log_sum.value().exp();
    let relative = tail.exp_m1() + relative_error * (1.0 + 2.0 * relative_error);
    Ok(DivisorSumEval {
        z1: z1.value(),
        z2: z2.value(),
        sigma,
        value,
        error_bound: value.norm() * relative,
        tail_bound: tail,
        prime_cutoff: cutoff,
    })
}

/// `log(sum_n d_k(n)^2 / n^2) / (2 k log log k)`, the normalized growth of the
/// squared divisor sum. Reported for inspection only; the `1 + o(1)` in its
/// expected limit is not quantified.
pub fn divisor_square_growth_ratio(k: f64, tol: f64) -> Result<f64> {
    if !(k > std::f64::consts::E) {
        return Err(Error::domain(format!(
            "need k > e so that log log k > 0, got {k}"
        )));
    }
    let z = ComplexOrder::real(k)?;
    let sum = global_divisor_sum(z, z, 1.0, tol)?;
    Ok(sum.value.re.ln() / (2.0 * k * k.ln().ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn order(re: f64, im: f64) -> ComplexOrder {
        ComplexOrder::new(c(re, im)).unwrap()
    }

    #[test]
    fn order_limits() {
        assert!(ComplexOrder::new(c(1e4, 0.0)).is_ok());
        assert!(ComplexOrder::new(c(1e4, 1.0)).is_err());
        assert!(ComplexOrder::new(c(f64::NAN, 0.0)).is_err());
        assert!(ComplexOrder::with_limit(c(20.0, 0.0), 10.0).is_err());
    }

    #[test]
    fn divisor_coeff_examples() {
        let z = order(0.3, -1.7);
        assert_eq!(divisor_coeff(z, 1).unwrap(), c(1.0, 0.0));
        for p in [2u64, 3, 97, 1_000_003] {
            assert!((divisor_coeff(z, p).unwrap() - z.value()).norm() < 1e-15);
        }
        // divisors of 12: 1 2 3 4 6 12
        let two = order(2.0, 0.0);
        assert!((divisor_coeff(two, 12).unwrap() - c(6.0, 0.0)).norm() < 1e-14);
        assert!(divisor_coeff(two, 0).is_err());
        assert!(divisor_coeff(two, MAX_FACTORABLE + 1).is_err());
    }

    #[test]
    fn divisor_coeff_counts_ordered_factorizations() {
        // d_3(n) counts ordered triples (a, b, c) with abc = n
        let three = order(3.0, 0.0);
        for n in 1..=200u64 {
            let mut count = 0u64;
            for a in 1..=n {
                if n % a != 0 {
                    continue;
                }
                for b in 1..=n / a {
                    if (n / a) % b == 0 {
                        count += 1;
                    }
                }
            }
            let v = divisor_coeff(three, n).unwrap();
            assert!(
                (v.re - count as f64).abs() < 1e-9 && v.im.abs() < 1e-12,
                "n={n}"
            );
        }
    }

    #[test]
    fn series_examples() {
        let one = order(1.0, 0.0);
        let zero = order(0.0, 0.0);
        let two = order(2.0, 0.0);
        let f = local_factor_series(one, one, 2, 1.0, 1e-15).unwrap();
        assert!((f.value - c(4.0 / 3.0, 0.0)).norm() < 1e-14);
        assert!(f.truncation_error <= 1e-15);
        for p in [2u64, 3, 11] {
            let f = local_factor_series(one, zero, p, 1.0, 1e-15).unwrap();
            assert!((f.value - c(1.0, 0.0)).norm() < 1e-15);
        }
        let f = local_factor_series(two, two, 2, 1.0, 1e-15).unwrap();
        // sum (a+1)^2 x^a = (1+x)/(1-x)^3 at x = 1/4
        assert!((f.value - c(80.0 / 27.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn series_rejects_slow_decay() {
        let big = order(3.0, 0.0);
        assert!(matches!(
            local_factor_series(big, big, 2, 0.6, 1e-12),
            Err(Error::Domain(_))
        ));
        assert!(local_factor_series(order(1.0, 0.0), order(1.0, 0.0), 2, 0.5, 1e-12).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let zero = order(0.0, 0.0);
        let f = local_factor_quadrature(zero, zero, 7, 0.8, 1e-14).unwrap();
        assert!((f.value - c(1.0, 0.0)).norm() < 1e-15);
        let one = order(1.0, 0.0);
        let q = local_factor_quadrature(one, one, 2, 1.0, 1e-14).unwrap();
        let s = local_factor_series(one, one, 2, 1.0, 1e-16).unwrap();
        assert!((q.value - s.value).norm() < 1e-13);
        // z1 = s/(2i), z2 = -s/(2i) with s = 1
        let z = c(0.0, -0.5);
        let q =
            local_factor_quadrature(order(z.re, z.im), order(-z.re, -z.im), 2, 1.0, 1e-14).unwrap();
        assert!(q.value.im.abs() < 1e-14);
        let bound = (PI / 6.0).exp();
        assert!(q.value.re >= 1.0 / bound && q.value.re <= bound);
    }

    #[test]
    fn conjugate_orders_give_nonnegative_real_factors() {
        for z in [c(0.5, 2.0), c(-1.5, 0.0), c(0.0, -3.0), c(2.0, 1.0)] {
            for p in [2u64, 3, 13] {
                for sigma in [0.6, 1.0] {
                    let f = local_factor(order(z.re, z.im), order(z.re, -z.im), p, sigma, 1e-14)
                        .unwrap();
                    assert!(f.value.im.abs() <= 1e-12 * f.value.norm().max(1.0));
                    assert!(f.value.re >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn tail_bound_zero_for_trivial_orders() {
        assert_eq!(log_tail_bound(0.0, 5.0, 1.0, 1000.0), 0.0);
        assert!(log_tail_bound(50.0, 50.0, 1.0, 10.0).is_infinite());
    }

    #[test]
    fn global_sum_trivial_and_error_paths() {
        let r = global_divisor_sum(order(1.0, 0.0), order(0.0, 0.0), 1.0, 1e-12).unwrap();
        assert!((r.value - c(1.0, 0.0)).norm() < 1e-15);
        assert!(global_divisor_sum(order(1.0, 0.0), order(1.0, 0.0), 0.5, 1e-6).is_err());
        let err =
            global_divisor_sum_with_cap(order(1.0, 0.0), order(1.0, 0.0), 0.6, 1e-12, 1_000_000)
                .unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }

    #[test]
    fn global_sum_zeta_two_low_precision() {
        let one = order(1.0, 0.0);
        let r = global_divisor_sum(one, one, 1.0, 1e-5).unwrap();
        let exact = PI * PI / 6.0;
        assert!((r.value.re - exact).abs() <= r.error_bound + 1e-14);
        assert!(r.error_bound < 1e-5 * exact * 1.01);
    }

    #[test]
    fn growth_ratio_is_finite() {
        let r = divisor_square_growth_ratio(10.0, 1e-3).unwrap();
        assert!(r.is_finite() && r > 0.0);
        assert!(divisor_square_growth_ratio(2.0, 1e-3).is_err());
    }
}

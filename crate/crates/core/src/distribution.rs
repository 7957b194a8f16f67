//! Tail distributions of `arg L(1, chi)`: the empirical counts over a modulus,
//! the random Euler product model, and the saddle-point prediction.

use rand::Rng;
use rand::SeedableRng;
use rand_distr::{StandardNormal, UnitCircle};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lvalues::SweepResult;
use crate::primes::{for_each_prime_in, primes_up_to};
use crate::special::ConstantsBundle;
use crate::summation::NeumaierSum;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;
/// Primes up to this bound use the exact `atan2`; above it a three-term series.
const EXACT_ARG_PRIME: u64 = 1000;

/// Sorted arguments of every non-principal character modulo `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub q: u64,
    pub sorted_args: Vec<f64>,
    pub phi_q: u64,
}

impl EmpiricalDistribution {
    pub fn from_sweep(sweep: &SweepResult) -> Self {
        let mut sorted_args: Vec<f64> = sweep.args().collect();
        sorted_args.sort_by(f64::total_cmp);
        Self {
            q: sweep.q,
            sorted_args,
            phi_q: sweep.phi(),
        }
    }

    /// Number of arguments strictly greater than `tau`.
    pub fn count_above(&self, tau: f64) -> usize {
        self.sorted_args.len() - self.sorted_args.partition_point(|&a| a <= tau)
    }

    /// Number of arguments strictly less than `-tau`.
    pub fn count_below_negated(&self, tau: f64) -> usize {
        self.sorted_args.partition_point(|&a| a < -tau)
    }

    /// `Psi_q(tau) = #{chi != chi_0 : arg L(1, chi) > tau} / phi(q)`.
    pub fn psi_q(&self, tau: f64) -> f64 {
        self.count_above(tau) as f64 / self.phi_q as f64
    }

    /// `Phi_q(tau) = #{chi != chi_0 : arg L(1, chi) < -tau} / phi(q)`.
    pub fn phi_q(&self, tau: f64) -> f64 {
        self.count_below_negated(tau) as f64 / self.phi_q as f64
    }

    pub fn max_arg(&self) -> f64 {
        self.sorted_args.last().copied().unwrap_or(0.0)
    }

    /// `log((1/phi(q)) sum e^{s arg})`.
    pub fn log_laplace(&self, s: f64) -> f64 {
        let peak = s * self.max_arg();
        let acc: NeumaierSum = self.sorted_args.iter().map(|&a| (s * a - peak).exp()).sum();
        peak + acc.value().ln() - (self.phi_q as f64).ln()
    }
}

/// Solution `s = e^u` of `tau = log u + C2 + (C1 + 1)/u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddlePoint {
    pub tau: f64,
    pub s: f64,
    pub u: f64,
    pub residual: f64,
}

fn saddle_rhs(u: f64, c: &ConstantsBundle) -> f64 {
    u.ln() + c.c2 + (c.c1 + 1.0) / u
}

/// Smallest `u = log s` accepted by the solver.
pub fn saddle_u_min(c: &ConstantsBundle) -> f64 {
    (c.c1 + 1.5).max(std::f64::consts::LN_10)
}

/// Smallest `tau` for which the saddle point and the tail prediction are produced.
pub fn tau_min(c: &ConstantsBundle) -> f64 {
    saddle_rhs(saddle_u_min(c), c)
}

fn check_tau(tau: f64, c: &ConstantsBundle) -> Result<()> {
    let lo = tau_min(c);
    if !(tau >= lo) || !tau.is_finite() {
        return Err(Error::domain(format!(
            "tau = {tau} is below the asymptotic regime tau_min = {lo}"
        )));
    }
    Ok(())
}

/// Newton's method on `u = log s`.
///
/// The right side is increasing and concave in `u` on the domain, so Newton
/// iterates started at the left end rise monotonically to the root.
pub fn solve_saddle(tau: f64, c: &ConstantsBundle) -> Result<SaddlePoint> {
    check_tau(tau, c)?;
    let a = c.c1 + 1.0;
    let mut u = saddle_u_min(c);
    let mut f = saddle_rhs(u, c) - tau;
    for _ in 0..200 {
        if f.abs() <= 1e-14 {
            break;
        }
        let step = f / (1.0 / u - a / (u * u));
        let next = u - step;
        let next_f = saddle_rhs(next, c) - tau;
        if next_f.abs() >= f.abs() && f.abs() <= 1e-12 {
            break;
        }
        u = next;
        f = next_f;
    }
    if f.abs() > 1e-12 {
        return Err(Error::accuracy(
            format!("saddle equation residual {} at tau = {tau}", f.abs()),
            f.abs(),
        ));
    }
    let s = u.exp();
    if !s.is_finite() {
        return Err(Error::Overflow(format!(
            "saddle point s = e^{u} overflows at tau = {tau}"
        )));
    }
    Ok(SaddlePoint {
        tau,
        s,
        u,
        residual: f.abs(),
    })
}

/// Natural log of the exponent `exp(e^{tau-C2} - C1 - 1) / e^{tau-C2}`.
pub fn theorem1_log_exponent(tau: f64, c: &ConstantsBundle) -> Result<f64> {
    check_tau(tau, c)?;
    let x = tau - c.c2;
    Ok(x.exp() - c.c1 - 1.0 - x)
}

/// `exp(e^{tau-C2} - C1 - 1) / e^{tau-C2}`, the rate in the tail prediction.
pub fn theorem1_exponent(tau: f64, c: &ConstantsBundle) -> Result<f64> {
    theorem1_log_exponent(tau, c).map(f64::exp)
}

/// Main term `exp(-exp(e^{tau-C2} - C1 - 1) / e^{tau-C2})` of the tail `Psi(tau)`.
pub fn theorem1_prediction(tau: f64, c: &ConstantsBundle) -> Result<f64> {
    theorem1_exponent(tau, c).map(|e| (-e).exp())
}

/// How the primes above the cutoff enter the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    Truncate,
    GaussianTail,
}

impl std::str::FromStr for TailMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncate" => Ok(Self::Truncate),
            "gaussian_tail" | "gaussian-tail" => Ok(Self::GaussianTail),
            other => Err(Error::domain(format!("unknown tail mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelConfig {
    pub prime_cutoff: u64,
    pub samples: u64,
    pub seed: u64,
    pub tail_mode: TailMode,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.prime_cutoff < 100 {
            return Err(Error::domain(format!(
                "prime cutoff must be >= 100, got {}",
                self.prime_cutoff
            )));
        }
        if self.samples < 1000 {
            return Err(Error::domain(format!(
                "sample count must be >= 1000, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// `sum_{p > cutoff} 1/(2p^2)`: exact up to `Y = 100 * cutoff`, then the
/// prime number theorem density, `int_Y^inf dt / (2 t^2 log t) = E1(log Y) / 2`.
pub fn tail_variance(cutoff: u64) -> f64 {
    let upper = cutoff.saturating_mul(100);
    let mut acc = NeumaierSum::new();
    for_each_prime_in(cutoff + 1, upper, |p| {
        let pf = p as f64;
        acc.add(0.5 / (pf * pf));
    });
    acc.add(0.5 * exp_integral_e1_large(upper as f64));
    acc.value()
}

/// `E1(log y)` by its asymptotic series `(1/(y x)) sum (-1)^k k!/x^k`, `x = log y >= 9`.
fn exp_integral_e1_large(y: f64) -> f64 {
    let x = y.ln();
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..6 {
        term *= -(k as f64) / x;
        sum += term;
    }
    sum / (y * x)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// `arg L(1, X)` with `X(p)` independent and uniform on the unit circle.
#[derive(Debug, Clone)]
pub struct RandomEulerProduct {
    config: ModelConfig,
    primes: Vec<f64>,
    /// Index of the first prime above [`EXACT_ARG_PRIME`].
    series_start: usize,
    tail_sigma: f64,
}

impl RandomEulerProduct {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let sieve = primes_up_to(config.prime_cutoff)?;
        let primes: Vec<f64> = sieve.primes().iter().map(|&p| p as f64).collect();
        let series_start = sieve.primes().partition_point(|&p| p <= EXACT_ARG_PRIME);
        let tail_sigma = match config.tail_mode {
            TailMode::Truncate => 0.0,
            TailMode::GaussianTail => tail_variance(config.prime_cutoff).sqrt(),
        };
        Ok(Self {
            config,
            primes,
            series_start,
            tail_sigma,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Standard deviation of the normal surrogate for the primes above the cutoff.
    pub fn tail_sigma(&self) -> f64 {
        self.tail_sigma
    }

    /// `sum_p Im(-log(1 - e^{i phi_p}/p))` for explicit angles, one per prime.
    pub fn arg_for_angles(&self, angles: &[f64]) -> Result<f64> {
        if angles.len() != self.primes.len() {
            return Err(Error::domain(format!(
                "expected {} angles, got {}",
                self.primes.len(),
                angles.len()
            )));
        }
        let acc: NeumaierSum = self
            .primes
            .iter()
            .zip(angles)
            .map(|(&p, &phi)| {
                let (sin, cos) = phi.sin_cos();
                sin.atan2(p - cos)
            })
            .sum();
        Ok(acc.value())
    }

    /// Sample number `index` of the stream selected by the seed.
    ///
    /// Each sample owns a generator derived from `(seed, index)`, so any
    /// partition of the indices across workers yields the same values.
    pub fn sample(&self, index: u64) -> f64 {
        let mut rng =
            Xoshiro256PlusPlus::seed_from_u64(splitmix64(splitmix64(self.config.seed) ^ index));
        let mut exact = 0.0;
        for &p in &self.primes[..self.series_start] {
            let [x, y]: [f64; 2] = rng.sample(UnitCircle);
            exact += y.atan2(p - x);
        }
        // sin(n phi)/(n p^n) for n = 1, 2, 3; the remainder is below 1/(3 p^4).
        let mut series = 0.0;
        for &p in &self.primes[self.series_start..] {
            let [x, y]: [f64; 2] = rng.sample(UnitCircle);
            let r = 1.0 / p;
            let s2 = 2.0 * x * y;
            let s3 = y * (3.0 - 4.0 * y * y);
            series += r * (y + r * (0.5 * s2 + r * s3 / 3.0));
        }
        let mut total = exact + series;
        if self.tail_sigma > 0.0 {
            let g: f64 = rng.sample(StandardNormal);
            total += self.tail_sigma * g;
        }
        total
    }

    /// Samples `0..count` in index order.
    pub fn samples(&self, count: u64) -> Vec<f64> {
        (0..count).into_par_iter().map(|i| self.sample(i)).collect()
    }
}

/// Sorted model samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSamples {
    pub config: ModelConfig,
    pub sorted: Vec<f64>,
}

impl ModelSamples {
    pub fn generate(config: ModelConfig) -> Result<Self> {
        let model = RandomEulerProduct::new(config)?;
        let mut sorted = model.samples(config.samples);
        sorted.par_sort_unstable_by(f64::total_cmp);
        Ok(Self { config, sorted })
    }

    pub fn count_above(&self, tau: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&a| a <= tau)
    }

    pub fn count_below_negated(&self, tau: f64) -> usize {
        self.sorted.partition_point(|&a| a < -tau)
    }

    pub fn psi(&self, tau: f64) -> ModelPsi {
        ModelPsi::from_counts(tau, self.count_above(tau) as u64, self.sorted.len() as u64)
    }
}

/// Monte Carlo estimate of `Psi(tau)` with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelPsi {
    pub tau: f64,
    pub psi_estimate: f64,
    pub ci_halfwidth: f64,
    pub exceed_count: u64,
    pub samples: u64,
}

impl ModelPsi {
    pub fn from_counts(tau: f64, exceed_count: u64, samples: u64) -> Self {
        let (lo, hi) = wilson_interval(exceed_count, samples);
        Self {
            tau,
            psi_estimate: exceed_count as f64 / samples as f64,
            ci_halfwidth: 0.5 * (hi - lo),
            exceed_count,
            samples,
        }
    }
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if k == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Monte Carlo `Psi(tau)` over a grid.
pub fn model_psi(config: ModelConfig, tau_grid: &[f64]) -> Result<Vec<ModelPsi>> {
    let samples = ModelSamples::generate(config)?;
    Ok(tau_grid.iter().map(|&t| samples.psi(t)).collect())
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_a(x) - F_b(x)|` of sorted samples.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One row of [`compare_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub tau: f64,
    pub psi_q: f64,
    pub psi_model: f64,
    pub ci: f64,
    /// Tail prediction; absent below `tau_min`.
    pub psi_thm1: Option<f64>,
    /// `log L_q(s(tau))` at the saddle point; absent below `tau_min`.
    pub log_laplace_q: Option<f64>,
}

/// Side-by-side empirical, model, and predicted tails.
pub fn compare_report(
    empirical: &EmpiricalDistribution,
    model: &ModelSamples,
    tau_grid: &[f64],
    c: &ConstantsBundle,
) -> Result<Vec<CompareRow>> {
    tau_grid
        .iter()
        .map(|&tau| {
            let m = model.psi(tau);
            let (psi_thm1, log_laplace_q) = if tau >= tau_min(c) {
                let saddle = solve_saddle(tau, c)?;
                (
                    Some(theorem1_prediction(tau, c)?),
                    Some(empirical.log_laplace(saddle.s)),
                )
            } else {
                (None, None)
            };
            Ok(CompareRow {
                tau,
                psi_q: empirical.psi_q(tau),
                psi_model: m.psi_estimate,
                ci: m.ci_halfwidth,
                psi_thm1,
                log_laplace_q,
            })
        })
        .collect()
}

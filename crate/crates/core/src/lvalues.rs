//! Exact `L(1, chi)` for every non-principal character modulo a prime, and
//! the empirical moments built from them.
//!
//! For `chi != chi_0` modulo `q`,
//! `L(1, chi) = -(1/q) sum_{a=1}^{q-1} chi(a) psi(a/q)`,
//! which in discrete-log coordinates `a = g^m` is a length-`(q-1)` DFT of
//! `psi(g^m / q)`. The direct path evaluates it per character; the fast path
//! evaluates all characters at once with an FFT.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::characters::{build_table, CharacterIndex, CharacterTable};
use crate::error::{Error, Result};
use crate::primes::primes_up_to;
use crate::special::digamma_unchecked;
use crate::summation::{ComplexNeumaierSum, NeumaierSum};

/// Largest modulus swept with the `O(q^2)` direct method unless told otherwise.
pub const DEFAULT_DIRECT_CAP: u64 = 200_000;
/// Prime-power cutoff `N` of the branch cross-check.
pub const DEFAULT_BRANCH_CUTOFF: u64 = 100_000;
/// A principal argument is accepted when it is this close to the prime-power sum.
pub const BRANCH_THRESHOLD: f64 = 0.5;
/// Largest `|z|` accepted by [`empirical_moment`].
pub const MAX_MOMENT_ORDER: f64 = 50.0;

/// Terms summed naively before being folded into the compensated total.
const BLOCK: usize = 64;

/// One character's `L(1, chi)` and its argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LValueRecord {
    pub q: u64,
    pub j: CharacterIndex,
    pub l_value: Complex64,
    /// Principal argument of `l_value`.
    pub arg: f64,
    pub branch_verified: bool,
    /// Principal argument minus the truncated prime-power sum.
    pub branch_residual: f64,
}

/// Outcome of [`arg_l_one`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchCheck {
    pub arg: f64,
    pub branch_verified: bool,
    pub branch_residual: f64,
}

/// `sum_m coeffs[m] * roots[j m mod n]` with blocked compensated accumulation.
fn twisted_sum(coeffs: &[f64], roots: &[Complex64], j: usize) -> Complex64 {
    let n = roots.len();
    let mut total = ComplexNeumaierSum::new();
    let mut idx = 0usize;
    for block in coeffs.chunks(BLOCK) {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in block {
            acc += roots[idx] * c;
            idx += j;
            if idx >= n {
                idx -= n;
            }
        }
        total.add(acc);
    }
    total.value()
}

/// Imaginary part of [`twisted_sum`].
fn twisted_sine_sum(coeffs: &[f64], roots: &[Complex64], j: usize) -> f64 {
    let n = roots.len();
    let mut total = NeumaierSum::new();
    let mut idx = 0usize;
    for block in coeffs.chunks(BLOCK) {
        let mut acc = 0.0;
        for &c in block {
            acc += roots[idx].im * c;
            idx += j;
            if idx >= n {
                idx -= n;
            }
        }
        total.add(acc);
    }
    total.value()
}

/// `psi(g^m mod q / q)` for `m = 0..q-1`.
fn digamma_coefficients(table: &CharacterTable) -> Vec<f64> {
    let q = table.modulus() as f64;
    table
        .units_by_index()
        .map(|(_, a)| digamma_unchecked(a as f64 / q))
        .collect()
}

/// `sum_{p^k <= cutoff, p != q, ind(p^k) = m} 1 / (k p^k)` for each `m`.
fn prime_power_coefficients(table: &CharacterTable, cutoff: u64) -> Vec<f64> {
    let q = table.modulus();
    let mut coeffs = vec![NeumaierSum::new(); table.order() as usize];
    if cutoff >= 2 {
        let sieve = primes_up_to(cutoff).expect("cutoff >= 2");
        for &p in sieve.primes() {
            if p == q {
                continue;
            }
            let mut pk = p;
            let mut k = 1u32;
            loop {
                let m = table.dlog(pk).expect("p != q") as usize;
                coeffs[m].add(1.0 / (k as f64 * pk as f64));
                match pk.checked_mul(p) {
                    Some(next) if next <= cutoff => {
                        pk = next;
                        k += 1;
                    }
                    _ => break,
                }
            }
        }
    }
    coeffs.iter().map(NeumaierSum::value).collect()
}

fn check_nonprincipal(table: &CharacterTable, j: CharacterIndex) -> Result<()> {
    if j.is_principal() {
        return Err(Error::domain(
            "L(1, chi_0) diverges; the principal character is excluded",
        ));
    }
    if j.get() as u64 >= table.order() {
        return Err(Error::domain(format!(
            "character index {} out of range for q = {}",
            j.get(),
            table.modulus()
        )));
    }
    Ok(())
}

/// `L(1, chi_j)` for one non-principal character, `O(q)`.
pub fn l_one(table: &CharacterTable, j: CharacterIndex) -> Result<Complex64> {
    check_nonprincipal(table, j)?;
    let coeffs = digamma_coefficients(table);
    Ok(-twisted_sum(&coeffs, table.roots(), j.get() as usize) / table.modulus() as f64)
}

fn branch_check(l_value: Complex64, prime_power_sum: f64) -> Result<BranchCheck> {
    if l_value.norm() == 0.0 || !l_value.norm().is_finite() {
        return Err(Error::domain(format!(
            "L(1, chi) = {l_value} cannot be zero or non-finite; this indicates a computation bug"
        )));
    }
    let arg = l_value.im.atan2(l_value.re);
    let residual = arg - prime_power_sum;
    Ok(BranchCheck {
        arg,
        branch_verified: residual.abs() < BRANCH_THRESHOLD,
        branch_residual: residual,
    })
}

/// Principal argument of `l_value`, cross-checked against
/// `Im sum_{p^k <= 10^5} chi(p)^k / (k p^k)`.
///
/// The truncated sum follows the argument continuously from `+infinity`, so
/// agreement within [`BRANCH_THRESHOLD`] confirms that the principal branch is
/// the one that continuous variation selects.
pub fn arg_l_one(
    table: &CharacterTable,
    j: CharacterIndex,
    l_value: Complex64,
) -> Result<BranchCheck> {
    arg_l_one_with_cutoff(table, j, l_value, DEFAULT_BRANCH_CUTOFF)
}

pub fn arg_l_one_with_cutoff(
    table: &CharacterTable,
    j: CharacterIndex,
    l_value: Complex64,
    cutoff: u64,
) -> Result<BranchCheck> {
    check_nonprincipal(table, j)?;
    let coeffs = prime_power_coefficients(table, cutoff);
    let sum = twisted_sine_sum(&coeffs, table.roots(), j.get() as usize);
    branch_check(l_value, sum)
}

/// How [`sweep_with`] evaluates the character sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    /// One `O(q)` sum per character.
    Direct,
    /// All characters at once by an `O(q log q)` FFT.
    Fft,
    /// Direct up to the cap, FFT above it.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOptions {
    pub method: SweepMethod,
    pub direct_cap: u64,
    pub branch_cutoff: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            method: SweepMethod::Direct,
            direct_cap: DEFAULT_DIRECT_CAP,
            branch_cutoff: DEFAULT_BRANCH_CUTOFF,
        }
    }
}

/// Every non-principal `L(1, chi)` for one modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub q: u64,
    /// Ordered by character index `j = 1..q-2`.
    pub records: Vec<LValueRecord>,
    pub max_arg: f64,
    pub min_arg: f64,
}

impl SweepResult {
    /// `phi(q) = q - 1`.
    pub fn phi(&self) -> u64 {
        self.q - 1
    }

    pub fn args(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.arg)
    }

    pub fn all_branches_verified(&self) -> bool {
        self.records.iter().all(|r| r.branch_verified)
    }

    /// Assembles a sweep from records, e.g. ones read back from a file.
    pub fn from_records(q: u64, mut records: Vec<LValueRecord>) -> Result<Self> {
        if q < 3 {
            return Err(Error::domain(format!(
                "modulus must be an odd prime, got {q}"
            )));
        }
        if records.len() as u64 != q - 2 {
            return Err(Error::domain(format!(
                "expected {} records for q = {q}, got {}",
                q - 2,
                records.len()
            )));
        }
        records.sort_by_key(|r| r.j);
        let max_arg = records
            .iter()
            .map(|r| r.arg)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_arg = records.iter().map(|r| r.arg).fold(f64::INFINITY, f64::min);
        Ok(Self {
            q,
            records,
            max_arg,
            min_arg,
        })
    }
}

/// Sweep with default options (direct method, `q <= 2*10^5`).
pub fn sweep(q: u64) -> Result<SweepResult> {
    let table = build_table(q)?;
    sweep_with(&table, SweepOptions::default())
}

fn inverse_dft(coeffs: &[f64]) -> Vec<Complex64> {
    let mut buffer: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_inverse(buffer.len());
    fft.process(&mut buffer);
    buffer
}

/// Computes every non-principal record for `table`.
///
/// Records depend only on the immutable table, so the parallel schedule
/// cannot change the output.
pub fn sweep_with(table: &CharacterTable, options: SweepOptions) -> Result<SweepResult> {
    let q = table.modulus();
    let n = table.order() as usize;
    let use_fft = match options.method {
        SweepMethod::Direct => {
            if q > options.direct_cap {
                return Err(Error::resource(format!(
                    "direct sweep of q = {q} exceeds the cap {}; use the FFT method",
                    options.direct_cap
                )));
            }
            false
        }
        SweepMethod::Fft => true,
        SweepMethod::Auto => q > options.direct_cap,
    };
    let psi = digamma_coefficients(table);
    let branch = prime_power_coefficients(table, options.branch_cutoff);
    let roots = table.roots();
    let qf = q as f64;

    let pairs: Vec<(Complex64, f64)> = if use_fft {
        let l_all = inverse_dft(&psi);
        let b_all = inverse_dft(&branch);
        (1..n).map(|j| (-l_all[j] / qf, b_all[j].im)).collect()
    } else {
        (1..n)
            .into_par_iter()
            .map(|j| {
                (
                    -twisted_sum(&psi, roots, j) / qf,
                    twisted_sine_sum(&branch, roots, j),
                )
            })
            .collect()
    };

    let records = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (l_value, prime_sum))| {
            let check = branch_check(l_value, prime_sum)?;
            Ok(LValueRecord {
                q,
                j: CharacterIndex((i + 1) as u32),
                l_value,
                arg: check.arg,
                branch_verified: check.branch_verified,
                branch_residual: check.branch_residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::from_records(q, records)
}

/// `R(q) = log q log_4 q / (10 log_2 q log_3 q)`, the range of orders for which
/// the moments are known to match the divisor sum; `None` where the iterated
/// logarithms are undefined or the radius is not positive.
pub fn moment_regime_radius(q: u64) -> Option<f64> {
    let l1 = (q as f64).ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    let l4 = l3.ln();
    let r = l1 * l4 / (10.0 * l2 * l3);
    (r.is_finite() && r > 0.0).then_some(r)
}

/// `M_q(z1, z2)` over all non-principal characters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEval {
    pub value: Complex64,
    /// Whether both orders lie inside `R(q)`.
    pub in_regime: bool,
    pub regime_radius: Option<f64>,
}

/// `(1/phi(q)) sum_{chi != chi_0} L(1,chi)^{z1} L(1, conj chi)^{z2}`, with powers
/// taken from `(log|L|, arg)` so that `L(1, conj chi) = conj L(1, chi)` is used exactly.
pub fn empirical_moment(sweep: &SweepResult, z1: Complex64, z2: Complex64) -> Result<MomentEval> {
    for z in [z1, z2] {
        if !(z.norm() <= MAX_MOMENT_ORDER) {
            return Err(Error::domain(format!(
                "moment order |z| = {} exceeds {MAX_MOMENT_ORDER}",
                z.norm()
            )));
        }
    }
    let mut acc = ComplexNeumaierSum::new();
    for r in &sweep.records {
        let log_l = Complex64::new(r.l_value.norm().ln(), r.arg);
        acc.add((z1 * log_l + z2 * log_l.conj()).exp());
    }
    let radius = moment_regime_radius(sweep.q);
    let in_regime = radius.is_some_and(|r| z1.norm() <= r && z2.norm() <= r);
    Ok(MomentEval {
        value: acc.value() / sweep.phi() as f64,
        in_regime,
        regime_radius: radius,
    })
}

/// `L_q(s) = (1/phi(q)) sum_{chi != chi_0} e^{s arg L(1, chi)}`.
pub fn laplace_transform_q(sweep: &SweepResult, s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain(format!(
            "Laplace variable must be >= 0, got {s}"
        )));
    }
    let acc: NeumaierSum = sweep.args().map(|a| (s * a).exp()).sum();
    Ok(acc.value() / sweep.phi() as f64)
}

/// `log L_q(s)`, stable for large `s`.
pub fn log_laplace_transform_q(sweep: &SweepResult, s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain(format!(
            "Laplace variable must be >= 0, got {s}"
        )));
    }
    let peak = s * sweep.max_arg;
    let acc: NeumaierSum = sweep.args().map(|a| (s * a - peak).exp()).sum();
    Ok(peak + acc.value().ln() - (sweep.phi() as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        let t = build_table(3).unwrap();
        let l = l_one(&t, CharacterIndex(1)).unwrap();
        assert!((l.re - PI / (3.0 * 3f64.sqrt())).abs() < 1e-13 && l.im == 0.0);
        let t = build_table(7).unwrap();
        let l = l_one(&t, t.legendre()).unwrap();
        assert!((l.re - PI / 7f64.sqrt()).abs() < 1e-13 && l.im == 0.0);
        assert!(l_one(&t, CharacterIndex(0)).is_err());
        assert!(l_one(&t, CharacterIndex(6)).is_err());
    }

    #[test]
    fn q3_sweep() {
        let s = sweep(3).unwrap();
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.records[0].arg, 0.0);
        assert!(s.all_branches_verified());
    }

    #[test]
    fn q5_conjugate_pair() {
        let t = build_table(5).unwrap();
        let a = l_one(&t, CharacterIndex(1)).unwrap();
        let b = l_one(&t, CharacterIndex(3)).unwrap();
        assert_eq!(a, b.conj());
        let ca = arg_l_one(&t, CharacterIndex(1), a).unwrap();
        let cb = arg_l_one(&t, CharacterIndex(3), b).unwrap();
        assert!(ca.arg != 0.0);
        assert_eq!(ca.arg, -cb.arg);
        assert!(ca.branch_verified && cb.branch_verified);
    }

    #[test]
    fn zero_l_value_is_a_bug() {
        let t = build_table(5).unwrap();
        assert!(arg_l_one(&t, CharacterIndex(1), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn sweep_matches_single_evaluations() {
        let t = build_table(101).unwrap();
        let s = sweep_with(&t, SweepOptions::default()).unwrap();
        assert_eq!(s.records.len(), 99);
        for j in [1u32, 17, 50, 99] {
            let l = l_one(&t, CharacterIndex(j)).unwrap();
            let r = &s.records[j as usize - 1];
            assert_eq!(r.j, CharacterIndex(j));
            assert!((r.l_value - l).norm() < 1e-14);
            let c = arg_l_one(&t, CharacterIndex(j), l).unwrap();
            assert!((c.branch_residual - r.branch_residual).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_matches_direct() {
        let t = build_table(1009).unwrap();
        let direct = sweep_with(&t, SweepOptions::default()).unwrap();
        let fft = sweep_with(
            &t,
            SweepOptions {
                method: SweepMethod::Fft,
                ..SweepOptions::default()
            },
        )
        .unwrap();
        for (a, b) in direct.records.iter().zip(&fft.records) {
            assert!((a.l_value - b.l_value).norm() < 1e-10);
            assert!((a.branch_residual - b.branch_residual).abs() < 1e-10);
        }
    }

    #[test]
    fn direct_cap_is_enforced() {
        let t = build_table(1009).unwrap();
        let opts = SweepOptions {
            direct_cap: 1000,
            ..SweepOptions::default()
        };
        assert!(matches!(sweep_with(&t, opts), Err(Error::Resource(_))));
        let auto = SweepOptions {
            method: SweepMethod::Auto,
            ..opts
        };
        assert_eq!(sweep_with(&t, auto).unwrap().records.len(), 1007);
    }

    #[test]
    fn moments_trivial_orders() {
        let s = sweep(11).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let m = empirical_moment(&s, zero, zero).unwrap();
        assert!((m.value - Complex64::new(9.0 / 10.0, 0.0)).norm() < 1e-15);
        assert!(!m.in_regime);
        assert!((laplace_transform_q(&s, 0.0).unwrap() - 0.9).abs() < 1e-15);

        let s3 = sweep(3).unwrap();
        let m = empirical_moment(&s3, Complex64::new(1.0, 0.0), zero).unwrap();
        assert!((m.value.re - PI / (3.0 * 3f64.sqrt()) / 2.0).abs() < 1e-13);
        assert!((laplace_transform_q(&s3, 7.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(empirical_moment(&s3, Complex64::new(51.0, 0.0), zero).is_err());
        assert!(laplace_transform_q(&s3, -1.0).is_err());
    }

    #[test]
    fn imaginary_moment_is_laplace_transform() {
        let s = sweep(211).unwrap();
        for x in [0.5, 1.0, 3.0] {
            let z = Complex64::new(0.0, -x / 2.0);
            let m = empirical_moment(&s, z, -z).unwrap();
            let lap = laplace_transform_q(&s, x).unwrap();
            assert!(m.value.im.abs() < 1e-12);
            assert!((m.value.re - lap).abs() < 1e-12 * lap);
            let log_lap = log_laplace_transform_q(&s, x).unwrap();
            assert!((log_lap - lap.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_gate_at_10007() {
        let t = build_table(10007).unwrap();
        let direct = sweep_with(&t, SweepOptions::default()).unwrap();
        let fft = sweep_with(
            &t,
            SweepOptions {
                method: SweepMethod::Fft,
                ..SweepOptions::default()
            },
        )
        .unwrap();
        let worst = direct
            .records
            .iter()
            .zip(&fft.records)
            .map(|(a, b)| (a.l_value - b.l_value).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
        assert!(fft.all_branches_verified());
    }

    #[test]
    fn q11_args_symmetric() {
        let s = sweep(11).unwrap();
        assert_eq!(s.records.len(), 9);
        let mut args: Vec<f64> = s.args().collect();
        let mut negated: Vec<f64> = args.iter().map(|a| -a).collect();
        args.sort_by(f64::total_cmp);
        negated.sort_by(f64::total_cmp);
        for (a, b) in args.iter().zip(&negated) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.max_arg, -s.min_arg);
    }

    #[test]
    fn q101_ceiling() {
        let s = sweep(101).unwrap();
        let ceiling = (101f64).ln().ln().ln() + 0.293_750_4 + std::f64::consts::LN_2 + 0.5;
        assert!(s.max_arg < ceiling, "{} vs {ceiling}", s.max_arg);
    }

    #[test]
    fn second_moment_is_real_positive() {
        let s = sweep(1009).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let m = empirical_moment(&s, one, one).unwrap();
        assert!(m.value.re > 0.0 && m.value.im.abs() <= 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pairing_and_real_characters(q in 3u64..600) {
            prop_assume!(crate::primes::is_prime(q));
            let t = build_table(q).unwrap();
            let s = sweep_with(&t, SweepOptions::default()).unwrap();
            for r in &s.records {
                let c = &s.records[t.conjugate(r.j).get() as usize - 1];
                prop_assert_eq!(r.l_value, c.l_value.conj());
                prop_assert_eq!(r.arg, -c.arg);
                if t.is_real(r.j) {
                    prop_assert_eq!(r.arg.abs(), 0.0);
                }
                prop_assert!(r.branch_verified);
            }
        }
    }

    #[test]
    fn regime_radius_is_empty_at_desk_scale() {
        assert_eq!(moment_regime_radius(10007), None);
        assert_eq!(moment_regime_radius(5), None);
        assert!(moment_regime_radius(1_000_000_007_000).is_some());
    }
}

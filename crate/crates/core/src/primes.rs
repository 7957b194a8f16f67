//! Prime generation and prime-indexed sums.

use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Upper constant in the Rosser–Schoenfeld bound `pi(x) < 1.25506 x / ln x`, valid for `x > 1`.
const ROSSER_SCHOENFELD: f64 = 1.25506;

/// Every prime up to `limit`, in increasing order.
///
/// Immutable once built, so it can be shared freely between threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSieve {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeSieve {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Primes `<= x`, clipped to the sieve limit.
    pub fn primes_up_to(&self, x: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }

    /// `sum_{p <= x} 1/p` over this sieve; `x` must not exceed the limit.
    pub fn reciprocal_sum(&self, x: f64) -> Result<f64> {
        let primes = self.checked_range(x)?;
        Ok(primes
            .iter()
            .map(|&p| 1.0 / p as f64)
            .sum::<NeumaierSum>()
            .value())
    }

    /// `sum_{p <= x} arctan(1/sqrt(p^2 - 1))` over this sieve.
    pub fn arctan_sum(&self, x: f64) -> Result<f64> {
        let primes = self.checked_range(x)?;
        Ok(primes
            .iter()
            .map(|&p| arctan_weight(p))
            .sum::<NeumaierSum>()
            .value())
    }

    fn checked_range(&self, x: f64) -> Result<&[u64]> {
        if !(x >= 2.0) {
            return Err(Error::domain(format!("prime sum needs x >= 2, got {x}")));
        }
        if x.floor() > self.limit as f64 {
            return Err(Error::domain(format!(
                "x = {x} exceeds sieve limit {}",
                self.limit
            )));
        }
        Ok(self.primes_up_to(x.floor() as u64))
    }
}

/// `arctan(1/sqrt(p^2 - 1))`, evaluated as `arcsin(1/p)` (same angle, no cancellation in `p^2 - 1`).
#[inline]
pub fn arctan_weight(p: u64) -> f64 {
    (1.0 / p as f64).asin()
}

/// Sieve of Eratosthenes over odd numbers.
pub fn primes_up_to(limit: u64) -> Result<PrimeSieve> {
    if limit < 2 {
        return Err(Error::domain(format!(
            "sieve limit must be >= 2, got {limit}"
        )));
    }
    let n = usize::try_from(limit).map_err(|_| Error::resource("sieve limit exceeds usize"))?;
    // index i stands for 2i + 1
    let half = n.div_ceil(2);
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_prime_count(limit));
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| (2 * i + 1) as u64),
    );
    Ok(PrimeSieve { limit, primes })
}

fn estimate_prime_count(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (ROSSER_SCHOENFELD * x / x.ln()) as usize + 1
    }
}

/// Calls `f` on every prime in `[lo, hi]` in increasing order, sieving in fixed-size segments.
///
/// Memory use is `O(sqrt(hi) + segment)` regardless of the range length.
pub fn for_each_prime_in<F: FnMut(u64)>(lo: u64, hi: u64, mut f: F) {
    const SEGMENT: u64 = 1 << 19;
    if hi < 2 || lo > hi {
        return;
    }
    let root = (hi as f64).sqrt() as u64 + 1;
    let base = primes_up_to(root.max(2)).expect("root >= 2");
    let lo = lo.max(2);
    if lo <= 2 {
        f(2);
    }
    // odd numbers only from here on
    let mut start = if lo <= 3 { 3 } else { lo | 1 };
    let mut marks = vec![false; (SEGMENT / 2) as usize];
    while start <= hi {
        let end = (start + SEGMENT - 1).min(hi);
        let count = ((end - start) / 2 + 1) as usize;
        marks[..count].iter_mut().for_each(|m| *m = false);
        for &p in base.primes().iter().skip(1) {
            let p2 = p * p;
            if p2 > end {
                break;
            }
            let mut m = if p2 >= start {
                p2
            } else {
                start.div_ceil(p) * p
            };
            if m % 2 == 0 {
                m += p;
            }
            while m <= end {
                marks[((m - start) / 2) as usize] = true;
                m += 2 * p;
            }
        }
        for (k, &c) in marks[..count].iter().enumerate() {
            if !c {
                f(start + 2 * k as u64);
            }
        }
        if end == hi {
            break;
        }
        start += SEGMENT;
    }
}

/// `sum_{p <= x} 1/p` by direct summation.
pub fn reciprocal_prime_sum(x: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::domain(format!("prime sum needs x >= 2, got {x}")));
    }
    primes_up_to(x.floor() as u64)?.reciprocal_sum(x)
}

/// `sum_{p <= x} arctan(1/sqrt(p^2 - 1))` by direct summation.
pub fn arctan_prime_sum(x: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::domain(format!("prime sum needs x >= 2, got {x}")));
    }
    primes_up_to(x.floor() as u64)?.arctan_sum(x)
}

/// Upper bound for `sum_{p > x} p^(-alpha)`, `alpha > 1`, `x >= 2`.
///
/// Partial summation against `pi(t) < 1.25506 t / ln t` gives
/// `alpha * 1.25506 * x^(1 - alpha) / ((alpha - 1) ln x)`.
pub fn prime_power_tail_bound(x: f64, alpha: f64) -> f64 {
    debug_assert!(alpha > 1.0 && x >= 2.0);
    alpha * ROSSER_SCHOENFELD * x.powf(1.0 - alpha) / ((alpha - 1.0) * x.ln())
}

/// Deterministic primality test by trial division (intended for `n <= ~10^12`).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = 7u64;
    let steps = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut k = 0;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += steps[k];
        k = (k + 1) % steps.len();
    }
    true
}

/// Prime factorization as `(p, exponent)` pairs in increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    let mut d = 3;
    while d * d <= n {
        push(d, &mut n);
        d += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

//! Dirichlet characters modulo an odd prime, realized through a primitive root.
//!
//! With `g` a primitive root and `ind(a)` its discrete logarithm, the
//! characters are `chi_j(a) = exp(2 pi i j ind(a) / (q - 1))`, `0 <= j < q - 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::{factorize, is_prime};

/// Largest modulus accepted by [`build_table`].
pub const MAX_MODULUS: u64 = 10_000_000;

/// Label of a character modulo `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CharacterIndex(pub u32);

impl CharacterIndex {
    pub const PRINCIPAL: CharacterIndex = CharacterIndex(0);

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn is_principal(self) -> bool {
        self.0 == 0
    }
}

/// Discrete-log table for a prime modulus plus the `(q-1)`-th roots of unity.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    q: u64,
    g: u64,
    /// `dlog[a] = ind(a)` for `1 <= a < q`; `dlog[0]` is unused.
    dlog: Vec<u32>,
    /// `powers[k] = g^k mod q`.
    powers: Vec<u32>,
    /// `roots[k] = exp(2 pi i k / (q - 1))`, exactly conjugate-symmetric.
    roots: Vec<Complex64>,
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Smallest primitive root of the prime `q`.
pub fn primitive_root(q: u64) -> u64 {
    let order = q - 1;
    let factors: Vec<u64> = factorize(order).into_iter().map(|(r, _)| r).collect();
    (2..q)
        .find(|&g| factors.iter().all(|&r| pow_mod(g, order / r, q) != 1))
        .unwrap_or(1)
}

/// `exp(2 pi i k / n)` for `0 <= k < n`, built from one octant so that
/// `roots[n - k] == conj(roots[k])` holds bit for bit and `1, i, -1, -i` are exact.
fn roots_of_unity(n: usize) -> Vec<Complex64> {
    let mut roots = vec![Complex64::new(0.0, 0.0); n];
    for (k, slot) in roots.iter_mut().enumerate().take(n / 2 + 1) {
        // fold k into [0, n/4] by symmetry where n allows it
        let (s, c) = if 4 * k == n {
            (1.0, 0.0)
        } else if 2 * k == n {
            (0.0, -1.0)
        } else if 4 * k > n && n.is_multiple_of(4) {
            // cos(2 pi k / n) = -cos(2 pi (n/2 - k) / n), sin equal
            let m = n / 2 - k;
            let (s, c) = (2.0 * PI * m as f64 / n as f64).sin_cos();
            (s, -c)
        } else {
            (2.0 * PI * k as f64 / n as f64).sin_cos()
        };
        *slot = Complex64::new(c, s);
    }
    roots[0] = Complex64::new(1.0, 0.0);
    for k in n / 2 + 1..n {
        roots[k] = roots[n - k].conj();
    }
    roots
}

/// Builds the character table for a prime `3 <= q <= 10^7`.
pub fn build_table(q: u64) -> Result<CharacterTable> {
    if q == 2 {
        return Err(Error::domain("q = 2 has no non-principal characters"));
    }
    if q > MAX_MODULUS {
        return Err(Error::resource(format!(
            "modulus {q} exceeds {MAX_MODULUS}"
        )));
    }
    if !is_prime(q) {
        return Err(Error::domain(format!("modulus {q} is not prime")));
    }
    let g = primitive_root(q);
    let n = (q - 1) as usize;
    let mut dlog = vec![0u32; q as usize];
    let mut powers = vec![0u32; n];
    let mut a = 1u64;
    for (k, slot) in powers.iter_mut().enumerate() {
        *slot = a as u32;
        dlog[a as usize] = k as u32;
        a = a * g % q;
    }
    Ok(CharacterTable {
        q,
        g,
        dlog,
        powers,
        roots: roots_of_unity(n),
    })
}

impl CharacterTable {
    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn primitive_root(&self) -> u64 {
        self.g
    }

    /// `q - 1`, the number of characters.
    pub fn order(&self) -> u64 {
        self.q - 1
    }

    /// `ind(a)` for `a` coprime to `q`, or `None` if `q | a`.
    pub fn dlog(&self, a: u64) -> Option<u32> {
        let r = a % self.q;
        (r != 0).then(|| self.dlog[r as usize])
    }

    /// `g^k mod q`.
    pub fn power(&self, k: u64) -> u64 {
        self.powers[(k % (self.q - 1)) as usize] as u64
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn index(&self, j: u64) -> Result<CharacterIndex> {
        if j >= self.q - 1 {
            return Err(Error::domain(format!(
                "character index {j} out of range [0, {})",
                self.q - 1
            )));
        }
        Ok(CharacterIndex(j as u32))
    }

    /// Index of the conjugate character.
    pub fn conjugate(&self, j: CharacterIndex) -> CharacterIndex {
        let n = (self.q - 1) as u32;
        CharacterIndex((n - j.0) % n)
    }

    /// Whether `chi_j` is real valued (principal or Legendre symbol).
    pub fn is_real(&self, j: CharacterIndex) -> bool {
        j.0 == 0 || 2 * j.0 as u64 == self.q - 1
    }

    /// Index of the Legendre symbol `(./q)`.
    pub fn legendre(&self) -> CharacterIndex {
        CharacterIndex(((self.q - 1) / 2) as u32)
    }

    /// `chi_j(n)`.
    pub fn value(&self, j: CharacterIndex, n: u64) -> Complex64 {
        match self.dlog(n) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => {
                let m = self.q - 1;
                self.roots[((j.0 as u64 * k as u64) % m) as usize]
            }
        }
    }

    /// Iterates `(ind(a), a)` pairs over the units `a`.
    pub fn units_by_index(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.powers.iter().enumerate().map(|(k, &a)| (k, a as u64))
    }
}

/// `chi_j(n)`; zero when `q | n`.
pub fn char_value(table: &CharacterTable, j: CharacterIndex, n: u64) -> Complex64 {
    table.value(j, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn roots_table_accuracy_and_symmetry() {
        for n in [2usize, 4, 6, 10, 12, 1008, 30010] {
            let roots = roots_of_unity(n);
            for (k, r) in roots.iter().enumerate() {
                let exact = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                assert!((r - exact).norm() < 4e-15, "n={n} k={k}");
                assert_eq!(roots[(n - k) % n], r.conj());
            }
            assert_eq!(roots[0], Complex64::new(1.0, 0.0));
            if n % 2 == 0 {
                assert_eq!(roots[n / 2], Complex64::new(-1.0, 0.0));
            }
        }
    }

    #[test]
    fn small_tables() {
        let t = build_table(5).unwrap();
        assert_eq!(t.primitive_root(), 2);
        for (a, k) in [(1, 0), (2, 1), (4, 2), (3, 3)] {
            assert_eq!(t.dlog(a), Some(k));
        }
        assert_eq!(build_table(7).unwrap().primitive_root(), 3);
        let t = build_table(3).unwrap();
        assert_eq!(t.primitive_root(), 2);
        assert_eq!((t.dlog(1), t.dlog(2)), (Some(0), Some(1)));
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(matches!(build_table(2), Err(Error::Domain(_))));
        assert!(matches!(build_table(15), Err(Error::Domain(_))));
        assert!(matches!(build_table(1), Err(Error::Domain(_))));
        assert!(matches!(build_table(10_000_019), Err(Error::Resource(_))));
    }

    #[test]
    fn dlog_is_bijective_and_exact() {
        for q in [3u64, 5, 7, 11, 101, 1009, 7919] {
            let t = build_table(q).unwrap();
            let mut seen = HashSet::new();
            for a in 1..q {
                let k = t.dlog(a).unwrap();
                assert!(seen.insert(k));
                assert!((k as u64) < q - 1);
                assert_eq!(pow_mod(t.primitive_root(), k as u64, q), a);
            }
            assert_eq!(t.dlog(1), Some(0));
            assert_eq!(t.dlog(q), None);
        }
    }

    #[test]
    fn values_examples() {
        let t = build_table(5).unwrap();
        let j = t.index(1).unwrap();
        assert_eq!(t.value(j, 2), Complex64::new(0.0, 1.0));
        assert_eq!(t.value(j, 10), Complex64::new(0.0, 0.0));
        for q in [7u64, 13, 101] {
            let t = build_table(q).unwrap();
            for j in 0..q - 1 {
                assert_eq!(
                    t.value(CharacterIndex(j as u32), q + 1),
                    Complex64::new(1.0, 0.0)
                );
            }
        }
    }

    #[test]
    fn legendre_matches_euler_criterion() {
        for q in [3u64, 7, 11, 103, 1009] {
            let t = build_table(q).unwrap();
            let leg = t.legendre();
            for n in 1..q {
                let euler = if pow_mod(n, (q - 1) / 2, q) == 1 {
                    1.0
                } else {
                    -1.0
                };
                assert_eq!(t.value(leg, n), Complex64::new(euler, 0.0));
            }
        }
    }

    #[test]
    fn orthogonality() {
        for q in [3u64, 5, 101, 1999] {
            let t = build_table(q).unwrap();
            for j in 1..q - 1 {
                let s: Complex64 = (1..q).map(|a| t.value(CharacterIndex(j as u32), a)).sum();
                assert!(s.norm() <= 1e-9 * q as f64, "q={q} j={j}");
            }
        }
    }

    #[test]
    fn real_characters_and_count() {
        for q in [5u64, 7, 101] {
            let t = build_table(q).unwrap();
            let reals = (0..q - 1)
                .filter(|&j| t.is_real(CharacterIndex(j as u32)))
                .count();
            assert_eq!(reals, 2);
            assert_eq!(t.order(), q - 1);
        }
        let t = build_table(3).unwrap();
        assert!(t.is_real(CharacterIndex(1)));
    }

    proptest! {
        #[test]
        fn complete_multiplicativity(j in 0u32..1008, a in 0u64..5000, b in 0u64..5000) {
            let t = build_table(1009).unwrap();
            let j = CharacterIndex(j);
            let lhs = t.value(j, a * b);
            let rhs = t.value(j, a) * t.value(j, b);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn conjugate_index_conjugates_exactly(j in 0u32..1008, n in 1u64..5000) {
            let t = build_table(1009).unwrap();
            let j = CharacterIndex(j);
            prop_assert_eq!(t.value(t.conjugate(j), n), t.value(j, n).conj());
        }
    }
}

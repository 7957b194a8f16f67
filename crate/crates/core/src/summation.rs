//! Compensated (Neumaier) accumulation.
//!
//! Prime sums in this crate run over up to ~10^7 terms of mixed magnitude,
//! and character sums cancel heavily; both need more than naive `+=`.

use std::iter::Sum;
use std::ops::AddAssign;

use num_complex::Complex64;

/// Running sum with an error-free-transformation correction term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Merges another partial sum into this one.
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}

impl Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Componentwise compensated sum of complex numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexNeumaierSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexNeumaierSum {
    pub const fn new() -> Self {
        Self {
            re: NeumaierSum::new(),
            im: NeumaierSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl Sum<Complex64> for ComplexNeumaierSum {
    fn sum<I: Iterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = ComplexNeumaierSum::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().sum::<NeumaierSum>().value()
}

//! Numerical laboratory for the distribution of `arg L(1, chi)` as `chi`
//! ranges over the non-principal Dirichlet characters modulo a prime.
//!
//! The crate computes exact values `L(1, chi)` from digamma sums, the
//! divisor-function Euler products that describe their complex moments, a
//! random Euler product model, and the saddle-point prediction for the tail
//! `Psi_q(tau)`, so that every piece can be checked against the others.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characters;
pub mod distribution;
pub mod divisor;
pub mod error;
pub mod imaginary;
pub mod lvalues;
pub mod primes;
pub mod quadrature;
pub mod special;
pub mod summation;

pub use characters::{build_table, CharacterIndex, CharacterTable};
pub use distribution::{
    EmpiricalDistribution, ModelConfig, ModelSamples, RandomEulerProduct, SaddlePoint, TailMode,
};
pub use error::{Error, Result};
pub use lvalues::{LValueRecord, SweepMethod, SweepOptions, SweepResult};
pub use primes::PrimeSieve;
pub use special::{ConstantEval, ConstantsBundle};

use std::path::PathBuf;

use argdist_core::lvalues::DEFAULT_DIRECT_CAP;
use argdist_core::special::ConstantsBundle;
use argdist_core::{SweepMethod, TailMode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "argdist",
    version,
    about = "Value distribution of arg L(1, chi) modulo a prime"
)]
pub struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of stdout.
    #[arg(long = "out", visible_alias = "output", short = 'o', global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// The constants C1, C2 and Euler's gamma.
    Constants(ConstantsArgs),
    /// L(1, chi) and its argument for every non-principal character.
    Sweep(SweepArgs),
    /// Empirical tail frequencies Psi_q and Phi_q.
    Psi(PsiArgs),
    /// Divisor-sum moments and the imaginary-moment asymptotics.
    Moments(MomentsArgs),
    /// Monte Carlo tail of the random Euler product model.
    Model(ModelArgs),
    /// Saddle point and predicted tail.
    Predict(PredictArgs),
    /// Empirical, model and predicted tails side by side.
    Compare(CompareArgs),
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Constants(_) | Command::Moments(_) | Command::Predict(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    /// Target accuracy of C1 and C2.
    #[arg(long, default_value_t = ConstantsBundle::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Direct,
    Fft,
    Auto,
}

impl From<MethodArg> for SweepMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => SweepMethod::Direct,
            MethodArg::Fft => SweepMethod::Fft,
            MethodArg::Auto => SweepMethod::Auto,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Prime modulus.
    #[arg(long)]
    pub q: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Largest modulus for the direct method.
    #[arg(long, default_value_t = DEFAULT_DIRECT_CAP)]
    pub direct_cap: u64,
}

/// A modulus to sweep, or a sweep CSV to read.
#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct SweepSource {
    /// Prime modulus.
    #[arg(long)]
    pub q: Option<u64>,
    /// Sweep CSV written by `argdist sweep`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PsiArgs {
    #[command(flatten)]
    pub source: SweepSource,
    /// Thresholds: `a,b,c` or `start:stop:count`.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub tau: Grid,
}

#[derive(Debug, Args, Serialize)]
#[group(skip)]
pub struct MomentsArgs {
    /// Global divisor sum `sum d_{z1}(n) d_{z2}(n) / n^{2 sigma}`.
    #[arg(
        long,
        conflicts_with = "imaginary",
        required_unless_present = "imaginary"
    )]
    pub main_term: bool,
    /// Exact and asymptotic `log sum d_{s/2i}(n) d_{-s/2i}(n) / n^2`.
    #[arg(long, requires = "s")]
    pub imaginary: bool,
    /// First order, `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, default_value = "1", allow_hyphen_values = true)]
    pub z1: [f64; 2],
    /// Second order, `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, default_value = "1", allow_hyphen_values = true)]
    pub z2: [f64; 2],
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Laplace variables for `--imaginary`.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub s: Option<Grid>,
    /// Relative accuracy for `--main-term` (default 1e-6), absolute accuracy
    /// of the log for `--imaginary` (default 1e-3).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also report the empirical moment over this prime modulus.
    #[arg(long)]
    pub q: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailArg {
    Truncate,
    #[value(name = "gaussian_tail", alias = "gaussian-tail")]
    GaussianTail,
}

impl From<TailArg> for TailMode {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::Truncate => TailMode::Truncate,
            TailArg::GaussianTail => TailMode::GaussianTail,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ModelOptions {
    /// Largest prime with an explicit random factor.
    #[arg(long = "primes", default_value_t = 100_000)]
    pub primes: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = TailArg::GaussianTail)]
    pub tail_mode: TailArg,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[command(flatten)]
    pub model: ModelOptions,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub tau: Grid,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub tau: Grid,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: SweepSource,
    #[command(flatten)]
    pub model: ModelOptions,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub tau: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

fn parse_real(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {s:?}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (parse_real(start)?, parse_real(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("bad count {count:?}"))?;
            match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n)
                    .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                    .collect(),
            }
        }
        [list] => list.split(',').map(parse_real).collect::<Result<_, _>>()?,
        _ => {
            return Err(format!(
                "expected `a,b,...` or `start:stop:count`, got {s:?}"
            ))
        }
    };
    if grid.is_empty() {
        return Err("grid is empty".into());
    }
    Ok(Grid(grid))
}

pub fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    match s.split_once(',') {
        Some((re, im)) => Ok([parse_real(re)?, parse_real(im)?]),
        None => Ok([parse_real(s)?, 0.0]),
    }
}

//! Benchmarks live in `benches/`; run them with `cargo bench -p argdist-bench`.

/// Moduli used by the sweep benchmarks.
pub const SWEEP_MODULI: [u64; 3] = [1009, 4001, 10007];

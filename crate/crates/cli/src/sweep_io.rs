use std::fs;
use std::path::{Path, PathBuf};

use argdist_core::lvalues::{sweep_with, BRANCH_THRESHOLD};
use argdist_core::{build_table, CharacterIndex, LValueRecord, SweepOptions, SweepResult};
use num_complex::Complex64;

use crate::error::{CliError, CliResult};
use crate::output::fmt15;

pub const COLUMNS: [&str; 6] = ["q", "j", "re_L", "im_L", "arg", "branch_residual"];
pub const CACHE_ENV: &str = "ARGDIST_CACHE_DIR";

pub fn record_row(r: &LValueRecord) -> Vec<String> {
    vec![
        r.q.to_string(),
        r.j.get().to_string(),
        fmt15(r.l_value.re),
        fmt15(r.l_value.im),
        fmt15(r.arg),
        fmt15(r.branch_residual),
    ]
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64) -> CliResult<T> {
    row.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::Input(format!("line {line}: bad value in column {}", COLUMNS[i])))
}

/// Reads a sweep CSV; `#` lines are comments.
pub fn read_sweep(path: &Path) -> CliResult<SweepResult> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(COLUMNS) {
        return Err(CliError::Input(format!(
            "{}: expected columns {}",
            path.display(),
            COLUMNS.join(",")
        )));
    }
    let mut q = None;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let row_q: u64 = field(&row, 0, line)?;
        if *q.get_or_insert(row_q) != row_q {
            return Err(CliError::Input(format!("line {line}: mixed moduli")));
        }
        let branch_residual: f64 = field(&row, 5, line)?;
        records.push(LValueRecord {
            q: row_q,
            j: CharacterIndex(field(&row, 1, line)?),
            l_value: Complex64::new(field(&row, 2, line)?, field(&row, 3, line)?),
            arg: field(&row, 4, line)?,
            branch_verified: branch_residual.abs() < BRANCH_THRESHOLD,
            branch_residual,
        });
    }
    let q = q.ok_or_else(|| CliError::Input(format!("{}: no records", path.display())))?;
    SweepResult::from_records(q, records).map_err(|e| CliError::Input(e.to_string()))
}

pub fn write_sweep_file(path: &Path, sweep: &SweepResult) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(COLUMNS)?;
    for r in &sweep.records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

fn cache_path(q: u64, options: &SweepOptions) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    let method = format!("{:?}", options.method).to_lowercase();
    Some(PathBuf::from(dir).join(format!("sweep-{q}-{method}-{}.csv", options.direct_cap)))
}

/// Computes the sweep, or reuses the copy in the cache directory when one is configured.
pub fn obtain_sweep(q: u64, options: SweepOptions) -> CliResult<SweepResult> {
    let cached = cache_path(q, &options);
    if let Some(path) = cached.as_deref().filter(|p| p.exists()) {
        return read_sweep(path);
    }
    let table = build_table(q)?;
    let sweep = sweep_with(&table, options)?;
    if let Some(path) = cached {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("csv.tmp");
        write_sweep_file(&tmp, &sweep)?;
        fs::rename(&tmp, &path)?;
    }
    Ok(sweep)
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::{Command, Format};
use crate::error::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything that determines a run's output.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a> {
    pub threads: usize,
    pub format: Format,
    pub out: Option<&'a Path>,
    #[serde(flatten)]
    pub command: &'a Command,
}

/// `x` with 15 significant digits, positional for moderate exponents.
pub fn fmt15(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..15).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (14 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt15).unwrap_or_default()
}

pub fn open_sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn header_line(config: &RunConfig) -> CliResult<String> {
    let json = serde_json::to_string(config).map_err(io::Error::from)?;
    Ok(format!("# argdist {VERSION} {json}\n"))
}

/// Writes a CSV table preceded by the header comment.
pub fn write_csv(
    sink: &mut dyn Write,
    config: &RunConfig,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> CliResult<()> {
    sink.write_all(header_line(config)?.as_bytes())?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `body`'s fields next to `version` and `config`.
pub fn write_json(sink: &mut dyn Write, config: &RunConfig, body: Value) -> CliResult<()> {
    let mut doc = Map::new();
    doc.insert("version".into(), Value::String(VERSION.into()));
    doc.insert(
        "config".into(),
        serde_json::to_value(config).map_err(io::Error::from)?,
    );
    match body {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    serde_json::to_writer_pretty(&mut *sink, &Value::Object(doc)).map_err(io::Error::from)?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

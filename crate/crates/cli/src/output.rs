//! CSV / JSON persistence. Floats are written in shortest round-trip form,
//! so files are byte-stable for a fixed configuration.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::sweep::CsvRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Opens `path` for writing, or stdout when `path` is `None`.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn label(path: Option<&Path>) -> &Path {
    path.unwrap_or(Path::new("<stdout>"))
}

pub fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink(path)?);
    w.write_record(header).map_err(|e| CliError::parse(label(path), e))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::parse(label(path), e))?;
    }
    w.flush().map_err(|e| CliError::io(label(path), e))
}

pub const RESULT_HEADER: [&str; 9] = ["N", "gamma", "E", "p", "criterion", "T_measured", "T_bound", "satisfied", "wall_time_s"];

pub fn write_result_csv(path: Option<&Path>, rows: &[CsvRow]) -> Result<()> {
    write_csv(path, rows, &RESULT_HEADER)
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::parse(label(path), e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(label(path), e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::parse(path, e))?;
    r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(|e| CliError::parse(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(io::BufReader::new(f)).map_err(|e| CliError::parse(path, e))
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::commands::CliError;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("write failed: {e}"))
}

pub fn write_json<T: Serialize + ?Sized>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io_error)?;
    writeln!(w).map_err(io_error)?;
    w.flush().map_err(io_error)
}

pub fn write_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for row in rows {
        w.serialize(row).map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}

/// JSON or CSV according to `format`; `csv_rows` builds the flat rows.
pub fn write_rows<T: Serialize + ?Sized, R: Serialize>(
    out: Option<&Path>,
    format: Format,
    json: &T,
    csv_rows: impl FnOnce() -> Vec<R>,
) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(out, json),
        Format::Csv => write_csv(out, &csv_rows()),
    }
}

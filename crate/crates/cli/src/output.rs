use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use marginloss::io::{write_json, Delimiter};
use marginloss::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Io(_) => EXIT_IO,
        }
    }

    /// The single JSON line written to standard error.
    pub fn to_json_line(&self) -> String {
        let (kind, message) = match self {
            Failure::Validation(m) => ("validation", m),
            Failure::Io(m) => ("io", m),
        };
        json!({ "error": message, "kind": kind, "exit_code": self.exit_code() }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// The format of a table written to `out`: the explicit flag, else the file
/// extension, else `fallback`.
pub fn table_format(flag: Option<Format>, out: Option<&Path>, fallback: Format) -> Format {
    flag.or_else(|| {
        match out?.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "tsv" | "tab" => Some(Format::Tsv),
            "json" => Some(Format::Json),
            _ => None,
        }
    })
    .unwrap_or(fallback)
}

pub fn delimiter(format: Format) -> Delimiter {
    match format {
        Format::Tsv => Delimiter::Tab,
        Format::Csv | Format::Json => Delimiter::Comma,
    }
}

/// Opens `out`, or standard output when `None`.
pub fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// The two comment lines that open every CSV/TSV output.
pub fn header_comments(command: &str, config: &Value) -> Vec<String> {
    vec![format!("marginloss {} {command}", env!("CARGO_PKG_VERSION")), format!("config {config}")]
}

/// A header and rows of numbers, written as CSV, TSV or a JSON object.
pub struct NumericTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn write(&self, out: Option<&Path>, format: Format, command: &str, config: &Value) -> CliResult<()> {
        let mut w = sink(out)?;
        match format {
            Format::Json => {
                let doc = TableDoc { command, config, columns: &self.columns, rows: &self.rows };
                write_json(&mut w, &doc)?;
            }
            Format::Csv | Format::Tsv => {
                marginloss::io::write_table(
                    &mut w,
                    &header_comments(command, config),
                    &self.columns,
                    self.rows.iter().cloned(),
                    delimiter(format),
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct TableDoc<'a> {
    command: &'a str,
    config: &'a Value,
    columns: &'a [String],
    rows: &'a [Vec<f64>],
}

/// Writes a JSON document followed by a newline.
pub fn write_document<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut w = sink(out)?;
    write_json(&mut w, value)?;
    w.flush()?;
    Ok(())
}

/// A one-line JSON summary on standard output.
pub fn summary(value: &Value) -> CliResult<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{value}")?;
    Ok(())
}


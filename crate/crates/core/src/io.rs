//! Reading and writing datasets, numeric tables, and fitted models.
//!
//! Dataset CSV: a header row, a label column named `y` holding -1/1 or 0/1,
//! and numeric feature columns. Lines starting with `#` are comments.
//! Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boosting::BoostModel;
use crate::error::{Error, Result};
use crate::estimator::{Dataset, FitStatus, ModelSpec};
use crate::label::Label;
use crate::loss_factory::LossTable;

pub const LABEL_COLUMN: &str = "y";

/// Scientific notation with 17 significant digits, enough to round-trip
/// every finite `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Io(e.to_string())
        } else {
            Error::InvalidConfig(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::InvalidConfig(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    pub fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    read_dataset_from(open(path)?)
}

/// Parses a dataset CSV; the delimiter is a comma unless the header
/// contains a tab.
pub fn read_dataset_from<R: Read>(mut reader: R) -> Result<Dataset> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let header_line = text.lines().find(|l| !l.starts_with('#') && !l.trim().is_empty()).unwrap_or("");
    let delimiter = if header_line.contains('\t') { b'\t' } else { b',' };
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = csv.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::InvalidConfig("missing header row".into()));
    }
    let label_at = headers
        .iter()
        .position(|h| h == LABEL_COLUMN)
        .ok_or_else(|| Error::InvalidConfig(format!("no `{LABEL_COLUMN}` column in header")))?;
    let names: Vec<String> =
        headers.iter().enumerate().filter(|&(j, _)| j != label_at).map(|(_, h)| h.to_string()).collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in csv.records().enumerate() {
        let record = record?;
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("data row {}: column `{}` is not a number: {field:?}", r + 1, &headers[j])))?;
            if j == label_at {
                labels.push(
                    Label::from_binary(value)
                        .map_err(|_| Error::InvalidConfig(format!("data row {}: label {field} is not in {{-1, 1}} or {{0, 1}}", r + 1)))?,
                );
            } else {
                features.push(value);
            }
        }
    }
    if labels.is_empty() {
        return Ok(Dataset::empty(names));
    }
    Dataset::from_flat(names.len(), features, labels)?.with_names(names)
}

/// Writes `# ` comment lines, a header, and rows of floats.
pub fn write_table<W: Write>(
    out: &mut W,
    comments: &[String],
    header: &[String],
    rows: impl IntoIterator<Item = Vec<f64>>,
    delimiter: Delimiter,
) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut csv = csv::WriterBuilder::new().delimiter(delimiter.byte()).from_writer(out);
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(row.iter().map(|&x| fmt_float(x)))?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes features followed by the `y` column in -1/1 coding.
pub fn write_dataset<W: Write>(out: &mut W, data: &Dataset, comments: &[String], delimiter: Delimiter) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut csv = csv::WriterBuilder::new().delimiter(delimiter.byte()).from_writer(out);
    let mut header: Vec<&str> = data.names().iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    csv.write_record(&header)?;
    for (x, y) in data.rows() {
        let mut record: Vec<String> = x.iter().map(|&v| fmt_float(v)).collect();
        record.push(if y == Label::Positive { "1".into() } else { "-1".into() });
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_loss_table<W: Write>(out: &mut W, table: &LossTable, comments: &[String], delimiter: Delimiter) -> Result<()> {
    let header = ["v".to_string(), "phi".to_string(), "dphi".to_string()];
    let rows = (0..table.len()).map(|i| vec![table.grid[i], table.values[i], table.derivatives[i]]);
    write_table(out, comments, &header, rows, delimiter)
}

/// A numeric table read back from [`write_table`] output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_table<R: Read>(reader: R, delimiter: Delimiter) -> Result<Table> {
    let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).delimiter(delimiter.byte()).from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::InvalidConfig(format!("not a number: {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// How a fitted loss was specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossDescriptor {
    pub name: String,
    pub dist: String,
    pub weight: Option<String>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModelFile {
    pub loss: LossDescriptor,
    pub model: ModelSpec,
    pub features: Vec<String>,
    pub beta: Vec<f64>,
    pub status: FitStatus,
    pub iterations: usize,
    pub final_risk: f64,
    pub gradient_norm: f64,
    pub r_emp: f64,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModelFile {
    pub features: Vec<String>,
    pub model: BoostModel,
    pub r_emp: f64,
    pub config: serde_json::Value,
}

/// Model JSON written by `fit`, `pnorm-fit`, and `boost`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    Linear(LinearModelFile),
    Adaboost(BoostModelFile),
}

impl ModelFile {
    /// The score `f(x)` as a model specification and coefficients.
    pub fn score_model(&self) -> (ModelSpec, Vec<f64>) {
        match self {
            ModelFile::Linear(m) => (m.model.clone(), m.beta.clone()),
            ModelFile::Adaboost(m) => m.model.as_model(),
        }
    }

    pub fn features(&self) -> &[String] {
        match self {
            ModelFile::Linear(m) => &m.features,
            ModelFile::Adaboost(m) => &m.features,
        }
    }
}

pub fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    Ok(serde_json::from_reader(open(path)?)?)
}

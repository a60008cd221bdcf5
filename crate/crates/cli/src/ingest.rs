//! CSV ingestion. Lines starting with `#` are skipped, a header row is
//! optional (any first record that does not parse as numbers), and every
//! remaining record must have the same number of columns.

use std::io::Read;
use std::path::Path;

use sdd_core::SampleMatrix;

use crate::error::CliError;

pub const DEFAULT_SHIFT: f64 = 1.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    /// Rows are already on the unit sphere.
    None,
    /// `x -> ln(c + x)` on raw counts, then scaling to unit length.
    LogShift(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOptions {
    pub transform: Transform,
    /// Scale rows to unit length when the transform is `None`.
    pub renormalize: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            transform: Transform::None,
            renormalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table<R: Read>(reader: R) -> Result<RawTable, CliError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in csv.records() {
        let record = record.map_err(CliError::data)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => {
                if let Some(first) = rows.first() {
                    if first.len() != values.len() {
                        return Err(CliError::Data(format!(
                            "line {line}: expected {} columns, found {}",
                            first.len(),
                            values.len()
                        )));
                    }
                }
                rows.push(values);
            }
            Err(_) if header.is_none() && rows.is_empty() => {
                header = Some(record.iter().map(str::to_owned).collect());
            }
            Err(e) => return Err(CliError::Data(format!("line {line}: {e}"))),
        }
    }
    if let (Some(h), Some(first)) = (&header, rows.first()) {
        if h.len() != first.len() {
            return Err(CliError::Data(format!(
                "header has {} columns but data rows have {}",
                h.len(),
                first.len()
            )));
        }
    }
    if rows.is_empty() {
        return Err(CliError::Data("input contains no data rows".into()));
    }
    Ok(RawTable { header, rows })
}

/// Applies the ingestion transform to one row in place.
pub fn transform_row(row: &mut [f64], options: &IngestOptions) -> Result<(), String> {
    match options.transform {
        Transform::None if !options.renormalize => return Ok(()),
        Transform::None => {}
        Transform::LogShift(c) => {
            for v in row.iter_mut() {
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(format!("count {v} is negative or not finite"));
                }
                *v = (c + *v).ln();
            }
        }
    }
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(format!("row cannot be scaled to unit length (norm {norm})"));
    }
    row.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

pub fn sample_from_table(
    mut table: RawTable,
    options: &IngestOptions,
) -> Result<SampleMatrix, CliError> {
    if let Transform::LogShift(c) = options.transform {
        if !(c > 0.0 && c.is_finite()) {
            return Err(CliError::Usage(format!(
                "shift constant must be positive, got {c}"
            )));
        }
    }
    for (i, row) in table.rows.iter_mut().enumerate() {
        transform_row(row, options)
            .map_err(|e| CliError::Data(format!("data row {}: {e}", i + 1)))?;
    }
    SampleMatrix::from_rows(&table.rows).map_err(|e| match e {
        sdd_core::SddError::InvalidRow { row, reason } => {
            CliError::Data(format!("data row {}: {reason}", row + 1))
        }
        other => CliError::data(other),
    })
}

pub fn load_sample(path: &Path, options: &IngestOptions) -> Result<SampleMatrix, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    sample_from_table(read_table(std::io::BufReader::new(file))?, options)
}

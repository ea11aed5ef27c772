//! CSV and JSON tables. CSV uses `.` as decimal separator, `\n` line endings
//! and a header row; floats are written in shortest round-trip form.

use serde::Serialize;

use crate::{CliError, Grid};

/// Numeric table; the JSON form has the same columns as the CSV form.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn csv_string(table: &Table) -> Result<String, CliError> {
    let mut w = writer();
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&table.columns).map_err(err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| num(x))).map_err(err)?;
    }
    finish(w)
}

pub fn csv_records(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = writer();
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    finish(w)
}

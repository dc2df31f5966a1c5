//! Row buffers for CSV tables with an errors column.

use std::path::Path;

use udw_core::io::{csv_writer, fmt_f64};

use crate::{io_err, RunError};

#[derive(Debug, Clone, Default)]
pub(crate) struct Row {
    pub cells: Vec<Option<f64>>,
    pub errors: Vec<String>,
}

impl Row {
    pub fn new(lead: f64) -> Self {
        Row { cells: vec![Some(lead)], errors: Vec::new() }
    }

    /// Stores a value, or records the error under the column name and leaves
    /// the cell empty.
    pub fn push<E: std::fmt::Display>(&mut self, column: &str, value: Result<f64, E>) {
        match value {
            Ok(v) => self.cells.push(Some(v)),
            Err(e) => {
                self.cells.push(None);
                self.errors.push(format!("{column}: {e}"));
            }
        }
    }
}

/// Writes `header` plus an `errors` column, returning how many rows carry
/// errors.
pub(crate) fn write_rows(path: &Path, header: &[&str], rows: &[Row]) -> Result<usize, RunError> {
    let mut w = csv_writer(path).map_err(io_err)?;
    let mut head: Vec<&str> = header.to_vec();
    head.push("errors");
    w.write_record(&head).map_err(io_err)?;
    let mut failed = 0;
    for row in rows {
        debug_assert_eq!(row.cells.len(), header.len());
        let mut rec: Vec<String> = row.cells.iter().map(|c| c.map(fmt_f64).unwrap_or_default()).collect();
        rec.push(row.errors.join("; "));
        failed += usize::from(!row.errors.is_empty());
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(failed)
}

/// Writes a table of plain numbers.
pub(crate) fn write_plain(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), RunError> {
    let mut w = csv_writer(path).map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

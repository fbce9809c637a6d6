//! CSV and JSON emission.
//!
//! CSV floats carry 17 significant digits (`{:.16e}`), enough to
//! round-trip any `f64` exactly; JSON summaries are pretty-printed with
//! stable key order (serde_json preserves insertion order of
//! `json!`-built maps) so identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// Format a float with 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV file being written row by row.
pub struct Csv {
    writer: BufWriter<File>,
    columns: usize,
    path: PathBuf,
}

/// One CSV cell: either a float (written via [`fmt`]) or a raw token
/// (integers, flags).
pub enum Cell {
    F(f64),
    I(i64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::I(x as i64)
    }
}

impl Csv {
    /// Create the file and write the header row.
    pub fn create(path: PathBuf, header: &[String]) -> Result<Self, CliError> {
        let file = File::create(&path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{}", header.join(","))
            .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))?;
        Ok(Self {
            writer,
            columns: header.len(),
            path,
        })
    }

    /// Write one row; the cell count must match the header.
    pub fn row(&mut self, cells: &[Cell]) -> Result<(), CliError> {
        assert_eq!(cells.len(), self.columns, "CSV row width mismatch");
        let mut line = String::with_capacity(cells.len() * 24);
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            match cell {
                Cell::F(x) => line.push_str(&fmt(*x)),
                Cell::I(x) => line.push_str(&x.to_string()),
            }
        }
        writeln!(self.writer, "{line}")
            .map_err(|e| CliError::Io(format!("write {}: {e}", self.path.display())))
    }

    /// Flush and close.
    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer
            .flush()
            .map_err(|e| CliError::Io(format!("flush {}: {e}", self.path.display())))
    }
}

/// Write a pretty-printed JSON summary.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialise summary: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Evenly spaced grid including both endpoints.
pub fn linspace(t0: f64, t1: f64, points: usize) -> Vec<f64> {
    let h = (t1 - t0) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                t1
            } else {
                t0 + h * i as f64
            }
        })
        .collect()
}

//! Plot-ready CSV tables and atomic file writes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// A named time series table; the first column is always `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, e.g. `metric` for `metric.csv`.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<String>) -> Self {
        Table { name: name.to_string(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// 17 significant digits, enough to reproduce every `f64` exactly.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:.16e}"))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

/// `re`/`im` column names of a row-major `dim × dim` matrix, e.g. `rho_01_re`.
pub fn matrix_columns(prefix: &str, dim: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            out.push(format!("{prefix}_{i}{j}_re"));
            out.push(format!("{prefix}_{i}{j}_im"));
        }
    }
    out
}

/// Writes through a temporary sibling and renames, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Writes `tables` as CSV into `dir` and returns the paths.
pub fn write_tables(dir: &Path, tables: &[Table]) -> CliResult<Vec<PathBuf>> {
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.csv", t.name));
            write_atomic(&path, &t.to_csv())?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_values_round_trip() {
        let mut t = Table::new("x", vec!["t".into(), "v".into()]);
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, f64::MAX, 5e-324];
        for (k, &v) in vals.iter().enumerate() {
            t.push(vec![k as f64, v]);
        }
        let csv = t.to_csv();
        let mut r = csv::Reader::from_reader(csv.as_bytes());
        assert_eq!(r.headers().unwrap(), vec!["t", "v"]);
        for (rec, &v) in r.records().zip(&vals) {
            let back: f64 = rec.unwrap()[1].parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn matrix_column_names() {
        assert_eq!(matrix_columns("rho", 2)[..4], ["rho_00_re", "rho_00_im", "rho_01_re", "rho_01_im"]);
    }
}

//! CSV tables and parameter records.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| fmt(*v))).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default)]
pub struct Record {
    lines: Vec<(String, String)>,
}

impl Record {
    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.lines.push((key.into(), value.into()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.text(key, fmt(value));
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut f = fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        for (k, v) in &self.lines {
            writeln!(f, "{k}={v}").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// `<out>.params` next to the main CSV.
pub fn params_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".params");
    PathBuf::from(s)
}

/// `<stem>_<tag>.<ext>` for an additional table.
pub fn numbered(out: &Path, i: impl std::fmt::Display) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{i}"),
    };
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn derived_paths() {
        assert_eq!(params_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.params"));
        assert_eq!(numbered(Path::new("a/b.csv"), 3), PathBuf::from("a/b_3.csv"));
        assert_eq!(numbered(Path::new("b"), 0), PathBuf::from("b_0"));
    }
}

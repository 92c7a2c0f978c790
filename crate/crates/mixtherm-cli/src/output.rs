//! CSV emission: 17-significant-digit floats, atomic write
//! (temp-then-rename), deterministic bodies.

use crate::CliError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Lossless float round-trip: 17 significant digits, scientific.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn body(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Write bytes atomically: temp file in the target directory, then
/// rename over the destination.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::Numeric {
        message: format!("cannot create {}: {e}", dir.display()),
    })?;
    let tmp: PathBuf = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(|e| CliError::Numeric {
        message: format!("cannot write {}: {e}", tmp.display()),
    })?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Numeric {
        message: format!("cannot rename {} → {}: {e}", tmp.display(), path.display()),
    })
}

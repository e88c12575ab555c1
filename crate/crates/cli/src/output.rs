//! CSV tables and JSON sidecars.
//!
//! Numbers are written with Rust's shortest round-trip `f64` formatting, so
//! re-parsing a table reproduces the exact values that were computed.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SUPERBUNCH_OUT_DIR";

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

/// `--out` if given, otherwise `name` inside the default output directory.
pub fn resolve(out: Option<&Path>, name: &str) -> PathBuf {
    out.map(Path::to_owned).unwrap_or_else(|| default_out_dir().join(name))
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// A table being assembled in memory; written in one go.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        ensure_parent(path)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        w.write_record(&self.header).map_err(|e| csv_error(path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(CliError::io(path))
    }
}

/// Shorthand for building a row from mixed displayable values.
#[macro_export]
macro_rules! cells {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::cell(&$x)),*] };
}

pub fn cell<T: Display>(x: &T) -> String {
    x.to_string()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).expect("metadata serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(CliError::io(dir)),
        _ => Ok(()),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Io { path: path.to_owned(), source: std::io::Error::other(e) }
}

/// Fields common to every sidecar.
#[derive(Debug, Serialize)]
pub struct Provenance {
    pub command: &'static str,
    pub version: &'static str,
}

impl Provenance {
    pub fn new(command: &'static str) -> Self {
        Self { command, version: env!("CARGO_PKG_VERSION") }
    }
}

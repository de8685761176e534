//! Versioned report envelope and output writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

/// Run metadata that is allowed to differ between identical runs.
#[derive(Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub outputs: Outputs,
}

#[derive(Debug, Default, Serialize)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Extra files written by the command, such as a found fiducial.
    pub extra: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub schema: u32,
    pub header: Header,
    pub config: Value,
    pub result: Value,
}

impl Envelope {
    pub fn new(config: Value, result: Value, outputs: Outputs) -> Self {
        let timestamp_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            schema: SCHEMA,
            header: Header {
                tool: "urgl",
                version: env!("CARGO_PKG_VERSION"),
                timestamp_unix,
                outputs,
            },
            config,
            result,
        }
    }
}

/// A flat table for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn write_json(path: &Path, envelope: &Envelope) -> Result<()> {
    let mut text = serde_json::to_string_pretty(envelope)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn print_json(envelope: &Envelope) -> Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, envelope)?;
    writeln!(lock)?;
    Ok(())
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

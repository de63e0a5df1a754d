//! Report assembly and emission.
//!
//! Every subcommand produces one [`Report`]: a JSON document under schema
//! "rgl/1" plus a flat CSV table (one row per grid cell, header first,
//! numbers at 17 significant digits). Reports with identical config and seed
//! are byte-identical except for the `timestamp` field.

use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "rgl/1";

/// Outcome classification carried in the JSON document and mapped to the
/// process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Violation,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub params: Value,
    pub status: Status,
    pub results: Value,
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
}

/// Render one f64 with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Report {
    pub fn to_json(&self) -> Value {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "timestamp": timestamp,
            "params": self.params,
            "status": self.status,
            "results": self.results,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.csv_header.join(","));
        out.push('\n');
        for row in &self.csv_rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Write the rendered report to a file (atomically, cleaning up the partial
/// temp file on failure) or to stdout when no path is given.
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> std::io::Result<()> {
    let rendered = match format {
        Format::Json => {
            serde_json::to_string_pretty(&report.to_json())
                .expect("report serialization is infallible")
                + "\n"
        }
        Format::Csv => report.to_csv(),
    };
    match out {
        None => {
            print!("{rendered}");
            std::io::stdout().flush()
        }
        Some(path) => {
            let tmp: PathBuf = path.with_extension("tmp-partial");
            let write_all = std::fs::write(&tmp, rendered.as_bytes());
            match write_all.and_then(|()| std::fs::rename(&tmp, path)) {
                Ok(()) => Ok(()),
                Err(e) => {
                    let _ = std::fs::remove_file(&tmp);
                    Err(e)
                }
            }
        }
    }
}

/// Fail fast when the output location cannot be created.
pub fn check_writable(out: Option<&Path>) -> std::io::Result<()> {
    if let Some(path) = out {
        let probe = path.with_extension("tmp-probe");
        std::fs::write(&probe, b"")?;
        std::fs::remove_file(&probe)?;
    }
    Ok(())
}

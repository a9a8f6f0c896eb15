//! Output files: CSV with `#` metadata lines, or JSON with a metadata block.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub config: Value,
    pub grid: Value,
}

impl Metadata {
    pub fn new(command: &str, config: &RunConfig, grid: Value) -> Self {
        let config = serde_json::to_value(config).expect("config serializes");
        let canonical = serde_json::to_string(&config).expect("value serializes");
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_sha256: hex::encode(Sha256::digest(canonical.as_bytes())),
            config,
            grid,
        }
    }
}

/// Full-precision (17 significant digit) decimal rendering.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column table rendered as CSV or JSON.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, meta: &Metadata) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tool: {} {}", meta.tool, meta.version);
        let _ = writeln!(out, "# command: {}", meta.command);
        let _ = writeln!(out, "# config_sha256: {}", meta.config_sha256);
        let _ = writeln!(out, "# config: {}", meta.config);
        let _ = writeln!(out, "# grid: {}", meta.grid);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, meta: &Metadata) -> String {
        json_document(
            meta,
            &json!({
                "columns": self.columns,
                "rows": self.rows,
            }),
        )
    }
}

pub fn json_document(meta: &Metadata, result: &impl Serialize) -> String {
    let doc = json!({
        "metadata": meta,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_precision_round_trips() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, -2.5e-300, 6.02214076e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn hash_depends_on_config() {
        let a = Metadata::new("x", &RunConfig::default(), Value::Null);
        let b = Metadata::new("x", &RunConfig::default_helical(), Value::Null);
        assert_ne!(a.config_sha256, b.config_sha256);
        assert_eq!(a.config_sha256.len(), 64);
    }

    #[test]
    fn csv_has_metadata_header() {
        let mut t = Table::new(&["s", "v"]);
        t.push(vec![0.0, 0.5]);
        let csv = t.to_csv(&Metadata::new("frenet", &RunConfig::default(), Value::Null));
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# tool: fluxknot"));
        assert_eq!(lines[5], "s,v");
        assert_eq!(lines[6], "0.0000000000000000e0,5.0000000000000000e-1");
    }
}

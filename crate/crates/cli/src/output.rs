// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! `<experiment>.csv` and `<experiment>.meta.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// A finished table.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Experiment-specific numbers for the metadata file.
    pub summary: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Provenance written into both output files.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub experiment: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub full: bool,
}

pub fn config_hash(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn library_version() -> &'static str {
    oqs_core::VERSION
}

/// Writes both files into `dir` and returns their paths.
pub fn write(dir: &Path, info: &RunInfo, table: &Table) -> std::io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}.csv", info.experiment));
    let meta_path = dir.join(format!("{}.meta.json", info.experiment));

    let mut out = BufWriter::new(File::create(&csv_path)?);
    writeln!(out, "# oqs-core {}", library_version())?;
    writeln!(out, "# command {}", info.command)?;
    writeln!(out, "# config_sha256 {}", info.config_sha256)?;
    writeln!(out, "# seed {}", info.seed)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&table.columns)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    out.flush()?;

    let meta = json!({
        "experiment": info.experiment,
        "command": info.command,
        "config_sha256": info.config_sha256,
        "library_version": library_version(),
        "seed": info.seed,
        "threads": info.threads,
        "full": info.full,
        "columns": table.columns,
        "rows": table.rows.len(),
        "summary": table.summary,
        "warnings": table.warnings,
    });
    let mut text = serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(&meta_path, text)?;
    Ok((csv_path, meta_path))
}

pub fn num(x: f64) -> String {
    x.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_sha256() {
        assert_eq!(
            config_hash(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn files_carry_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let info = RunInfo {
            experiment: "t".into(),
            command: "weights".into(),
            config_sha256: "00".into(),
            seed: 3,
            threads: None,
            full: false,
        };
        let mut table = Table::new(&["a", "b"]);
        table.push(vec![num(1.5), num(-2.0)]);
        let (csv_path, meta_path) = write(dir.path(), &info, &table).unwrap();
        let text = fs::read_to_string(csv_path).unwrap();
        assert!(text.starts_with(&format!("# oqs-core {}\n", library_version())));
        assert!(text.contains("# config_sha256 00\n"));
        assert!(text.ends_with("a,b\n1.5,-2\n"));
        let meta: Value = serde_json::from_str(&fs::read_to_string(meta_path).unwrap()).unwrap();
        assert_eq!(meta["library_version"], library_version());
        assert_eq!(meta["rows"], 1);
    }
}

//! Versioned CSV tables and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const CSV_HEADER: &str = "# latflow-csv v1";

/// Writes the version comment line followed by the serialized rows.
pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "{CSV_HEADER}")?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Header and records of a table written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

/// Git-style object hash: sha256 of `"blob <len>\0" + content`.
pub fn content_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: Value,
    pub input_hash: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    /// The hash covers the canonical JSON text of `config`.
    pub fn new(subcommand: &str, config: Value, outputs: Vec<String>) -> Self {
        let text = serde_json::to_string(&config).expect("JSON values serialize");
        Self {
            tool: "latflow".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            input_hash: content_hash(text.as_bytes()),
            config,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

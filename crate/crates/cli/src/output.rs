//! Output bundle: manifest, JSON reports with sorted keys and CSV tables.

use crate::config::{OutputSection, RunConfig};
use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub struct Bundle {
    dir: PathBuf,
    formats: OutputSection,
    files: Vec<String>,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

/// Pretty JSON with object keys in sorted order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

impl Bundle {
    pub fn create(dir: &Path, cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut b = Self { dir: dir.to_path_buf(), formats: cfg.output.clone(), files: Vec::new() };
        b.write_raw("config.json", &cfg.canonical_json())?;
        Ok(b)
    }

    fn write_raw(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if self.formats.json() {
            let text = to_sorted_json(value)?;
            self.write_raw(name, &text)?;
        }
        Ok(())
    }

    /// Header row plus records, comma separated, LF endings.
    pub fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
        if !self.formats.csv() {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(mut self, cfg: &RunConfig, command: &str, passed: Option<bool>) -> Result<()> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut files = self.files.clone();
        files.sort();
        let manifest = serde_json::json!({
            "command": command,
            "config_hash": config_hash(cfg),
            "config_file": "config.json",
            "seed": cfg.seed,
            "versions": {
                "acgraph": env!("CARGO_PKG_VERSION"),
            },
            "created_unix": created,
            "files": files,
            "passed": passed,
        });
        let text = to_sorted_json(&manifest)?;
        self.write_raw("manifest.json", &text)
    }
}

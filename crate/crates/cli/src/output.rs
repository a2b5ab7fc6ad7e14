use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// `{:.16e}`: 17 significant digits, round-trips every `f64`.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// One invariant checked by a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// `false` for informational entries that do not affect the exit code.
    pub applicable: bool,
    pub value: f64,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, value: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, applicable: true, value, detail: detail.into() }
    }

    pub fn informational(name: &str, value: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: true, applicable: false, value, detail: detail.into() }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    passed: bool,
    checks: &'a [Check],
}

#[derive(Serialize)]
struct Meta<'a> {
    experiment: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a RunConfig,
    /// Git-style (SHA-256 object format) tree hash over the data files.
    content_hash: String,
    files: Vec<FileEntry>,
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    blob: String,
}

/// `sha256("blob <len>\0" || bytes)`, as git computes object ids.
pub fn blob_hash(bytes: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().into()
}

/// Hash of a flat git tree holding `entries` (name, blob id) as regular files.
pub fn tree_hash(entries: &[(String, [u8; 32])]) -> [u8; 32] {
    let mut sorted: Vec<&(String, [u8; 32])> = entries.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut body = Vec::new();
    for (name, id) in sorted {
        body.extend_from_slice(format!("100644 {name}\0").as_bytes());
        body.extend_from_slice(id);
    }
    let mut h = Sha256::new();
    h.update(format!("tree {}\0", body.len()).as_bytes());
    h.update(&body);
    h.finalize().into()
}

/// Output directory of one run; data files are hashed into `meta.json`.
pub struct OutputDir {
    path: PathBuf,
    files: Vec<(String, [u8; 32])>,
}

impl OutputDir {
    pub fn create(path: &Path) -> Result<Self> {
        std::fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))?;
        Ok(Self { path: path.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path.join(name);
        std::fs::write(&p, bytes).with_context(|| format!("cannot write {}", p.display()))?;
        self.files.push((name.to_string(), blob_hash(bytes)));
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `summary.json` (when there are checks) and `meta.json`;
    /// returns whether every applicable check passed.
    pub fn finish(mut self, config: &RunConfig, checks: &[Check]) -> Result<bool> {
        let passed = checks.iter().filter(|c| c.applicable).all(|c| c.passed);
        let experiment = config.experiment.name();
        if !checks.is_empty() {
            self.write_json("summary.json", &Summary { experiment, passed, checks })?;
        }
        let meta = Meta {
            experiment,
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed,
            config,
            content_hash: hex::encode(tree_hash(&self.files)),
            files: self.files.iter().map(|(n, id)| FileEntry { name: n.clone(), blob: hex::encode(id) }).collect(),
        };
        let text = serde_json::to_string_pretty(&meta)? + "\n";
        let p = self.path.join("meta.json");
        std::fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?;
        Ok(passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789] {
            let s = fmt_f(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn blob_header_is_git_style() {
        // empty blob, SHA-256 object format
        assert_eq!(
            hex::encode(blob_hash(b"")),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }
}

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// In-memory results of one run, keyed by file name.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
    pub report: serde_json::Value,
    /// Git-style content hash of the Hamiltonian text, when one was built.
    pub hamiltonian_hash: Option<String>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        self.files.get(name).and_then(|b| std::str::from_utf8(b).ok())
    }
}

/// Shortest round-trip text, in exponent form for very small or large magnitudes.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// CSV text from a header and rows of numbers.
pub fn csv_table<R: AsRef<[f64]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|&v| fmt_num(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// `sha256("blob <len>\0" + content)`.
pub fn blob_hash(content: &str) -> String {
    let mut bytes = format!("blob {}\0", content.len()).into_bytes();
    bytes.extend_from_slice(content.as_bytes());
    sha256_hex(&bytes)
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, dir.join(name)).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FileEntry {
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    hamiltonian_hash: Option<&'a str>,
    files: BTreeMap<&'a str, FileEntry>,
    wall_time_s: f64,
}

/// Writes every artifact, `report.json` and `manifest.json` into `dir`.
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, mut art: Artifacts, wall_time_s: f64) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let report = serde_json::to_string_pretty(&art.report).map_err(|e| CliError::Io(e.to_string()))?;
    art.add("report.json", report + "\n");
    for (name, bytes) in &art.files {
        write_atomic(dir, name, bytes)?;
    }
    let manifest = Manifest {
        tool: "khlab",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        hamiltonian_hash: art.hamiltonian_hash.as_deref(),
        files: art
            .files
            .iter()
            .map(|(k, v)| (k.as_str(), FileEntry { sha256: sha256_hex(v), bytes: v.len() }))
            .collect(),
        wall_time_s,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(dir, "manifest.json", (text + "\n").as_bytes())
}

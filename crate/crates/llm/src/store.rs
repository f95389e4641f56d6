//! On-disk response store.
//!
//! Layout: `<runs>/<run_id>/manifest.json` plus one
//! `<runs>/<run_id>/<problem_id>/<variant>_<attempt>.json` per completed
//! attempt. Records are written to a temporary file and renamed into place,
//! so a record either exists completely or not at all.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::EndpointConfig;
use crate::{LlmError, Result};

pub const RUN_MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub problem_id: String,
    pub variant: String,
    pub attempt: u64,
    pub model: String,
    pub prompt_hash: String,
    pub raw_text: String,
    pub latency_ms: u64,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub tries: u32,
}

/// Endpoint settings echoed into a run manifest. Header values are the
/// configured templates, so no key material is recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointEcho {
    pub base_url: String,
    pub model: String,
    pub temperature: Option<f64>,
    pub max_retries: u32,
    pub concurrency: usize,
    pub header_names: Vec<String>,
}

impl From<&EndpointConfig> for EndpointEcho {
    fn from(c: &EndpointConfig) -> Self {
        Self {
            base_url: c.base_url.clone(),
            model: c.model.clone(),
            temperature: c.temperature,
            max_retries: c.max_retries,
            concurrency: c.concurrency,
            header_names: c.headers.keys().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub benchmark_path: PathBuf,
    /// SHA-256 of the benchmark's manifest file.
    pub benchmark_hash: String,
    pub endpoint: EndpointEcho,
    pub attempts: u64,
    pub variants: Vec<String>,
    pub tool_version: String,
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| LlmError::Config(format!("{} has no parent directory", path.display())))?;
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("record");
    let tmp = dir.join(format!(".{name}.{}.{:?}.tmp", std::process::id(), std::thread::current().id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn check_component(what: &str, s: &str) -> Result<()> {
    if s.is_empty() || s.starts_with('.') || s.contains(['/', '\\']) {
        return Err(LlmError::Config(format!("{what} `{s}` cannot be used as a path component")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ResponseStore {
    root: PathBuf,
}

impl ResponseStore {
    /// Store rooted at `<runs_dir>/<run_id>`; created lazily on first write.
    pub fn new(runs_dir: &Path, run_id: &str) -> Result<Self> {
        check_component("run id", run_id)?;
        Ok(Self { root: runs_dir.join(run_id) })
    }

    /// Store rooted at an existing run directory.
    pub fn open(run_dir: &Path) -> Result<Self> {
        if !run_dir.is_dir() {
            return Err(LlmError::Config(format!("run directory {} does not exist", run_dir.display())));
        }
        Ok(Self { root: run_dir.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn record_path(&self, problem_id: &str, variant: &str, attempt: u64) -> Result<PathBuf> {
        check_component("problem id", problem_id)?;
        check_component("variant", variant)?;
        Ok(self.root.join(problem_id).join(format!("{variant}_{attempt}.json")))
    }

    pub fn read(&self, problem_id: &str, variant: &str, attempt: u64) -> Result<Option<AttemptRecord>> {
        let path = self.record_path(problem_id, variant, attempt)?;
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_str(&fs::read_to_string(path)?)?))
    }

    /// True if a record exists for the attempt and was made from the same prompt.
    pub fn is_complete(&self, problem_id: &str, variant: &str, attempt: u64, prompt_hash: &str) -> bool {
        matches!(self.read(problem_id, variant, attempt), Ok(Some(r)) if r.prompt_hash == prompt_hash)
    }

    pub fn write(&self, record: &AttemptRecord) -> Result<PathBuf> {
        let path = self.record_path(&record.problem_id, &record.variant, record.attempt)?;
        write_atomic(&path, serde_json::to_string_pretty(record)?.as_bytes())?;
        Ok(path)
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> Result<()> {
        write_atomic(&self.root.join(RUN_MANIFEST_FILE), serde_json::to_string_pretty(manifest)?.as_bytes())
    }

    pub fn read_manifest(&self) -> Result<RunManifest> {
        let path = self.root.join(RUN_MANIFEST_FILE);
        let text = fs::read_to_string(&path)
            .map_err(|e| LlmError::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Every record in the store, sorted by (problem, variant, attempt).
    pub fn records(&self) -> Result<Vec<AttemptRecord>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            if !entry.file_type()?.is_dir() {
                continue;
            }
            for file in fs::read_dir(entry.path())? {
                let path = file?.path();
                let is_record = path.extension().is_some_and(|e| e == "json")
                    && !path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
                if is_record {
                    let record: AttemptRecord = serde_json::from_str(&fs::read_to_string(&path)?)
                        .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
                    out.push(record);
                }
            }
        }
        out.sort_by(|a, b| (&a.problem_id, &a.variant, a.attempt).cmp(&(&b.problem_id, &b.variant, b.attempt)));
        Ok(out)
    }
}

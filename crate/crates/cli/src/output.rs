use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Provenance written next to every output file as `<file>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub wall_clock: WallClock,
}

#[derive(Debug, Serialize)]
pub struct WallClock {
    pub started_unix_s: f64,
    pub elapsed_ms: f64,
}

/// Collects outputs for one invocation and stamps each with the manifest.
pub struct Run {
    subcommand: String,
    config: serde_json::Value,
    inputs: Vec<PathBuf>,
    seed: Option<u64>,
    started: SystemTime,
    clock: Instant,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn new(subcommand: &str, config: &impl Serialize, inputs: Vec<PathBuf>, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(config).context("serializing configuration")?,
            inputs,
            seed,
            started: SystemTime::now(),
            clock: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub fn write_json(&mut self, path: &Path, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).context("serializing output")?;
        text.push('\n');
        self.write_bytes(path, text.as_bytes())
    }

    pub fn write_csv<R: Serialize>(&mut self, path: &Path, rows: &[R]) -> Result<()> {
        self.write_bytes(path, &csv_bytes(rows)?)
    }

    fn write_bytes(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Writes one manifest per output file.
    pub fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs.clone(),
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_clock: WallClock {
                started_unix_s: self
                    .started
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs_f64())
                    .unwrap_or(0.0),
                elapsed_ms: self.clock.elapsed().as_secs_f64() * 1e3,
            },
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        for out in &self.outputs {
            let path = sidecar(out, "manifest.json");
            fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// `<path>.<suffix>`, keeping the original extension.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

pub fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).context("writing CSV row")?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV: {e}"))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid {what} {}", path.display()))
}

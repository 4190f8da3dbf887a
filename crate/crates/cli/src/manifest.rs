use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to rerun a subcommand.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub argv: Vec<String>,
    /// Configuration after merging defaults, config file and flags.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<PathBuf>,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

impl RunManifest {
    pub fn new<C: Serialize>(
        subcommand: &'static str,
        argv: &[String],
        config: &C,
        seed: Option<u64>,
        started_unix_ms: u128,
    ) -> CliResult<Self> {
        Ok(Self {
            tool: "affine-pa",
            version: affine_pa::VERSION,
            subcommand,
            argv: argv.to_vec(),
            config: serde_json::to_value(config)?,
            seed,
            started_unix_ms,
            finished_unix_ms: started_unix_ms,
            outputs: Vec::new(),
        })
    }

    /// Stamps the finish time and writes `manifest.json` into `dir`.
    pub fn write(mut self, dir: &Path) -> CliResult<PathBuf> {
        self.finished_unix_ms = now_ms();
        let path = dir.join(MANIFEST_FILE);
        self.outputs.push(path.clone());
        fs::write(&path, serde_json::to_string_pretty(&self)? + "\n")?;
        Ok(path)
    }
}

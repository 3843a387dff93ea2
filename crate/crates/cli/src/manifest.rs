//! Run manifest: one entry per executed stage, replaced on rerun.
//!
//! This is the only artifact that carries wall-clock data, so every other
//! output stays byte-identical across runs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

pub const FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub stages: BTreeMap<String, StageEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageEntry {
    pub stage_seed: u64,
    pub inputs: BTreeMap<String, u64>,
    pub outputs: BTreeMap<String, u64>,
    pub started_at: String,
    pub elapsed_ms: u64,
}

/// Row counts gathered while a stage runs.
pub struct StageRun {
    name: &'static str,
    seed: u64,
    started_at: String,
    clock: Instant,
    pub inputs: BTreeMap<String, u64>,
    pub outputs: BTreeMap<String, u64>,
}

impl StageRun {
    pub fn start(name: &'static str, cfg: &PipelineConfig) -> Self {
        log::info!("stage {name} started");
        Self {
            name,
            seed: cfg.stage_seed(name),
            started_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            clock: Instant::now(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input(&mut self, name: &str, rows: usize) {
        self.inputs.insert(name.into(), rows as u64);
    }

    pub fn output(&mut self, name: &str, rows: usize) {
        self.outputs.insert(name.into(), rows as u64);
    }

    /// Records the stage in `out/manifest.json`, replacing any earlier
    /// entry for the same stage.
    pub fn finish(self, cfg: &PipelineConfig) -> Result<()> {
        let path = cfg.out.join(FILE);
        let mut m = read(&path)?;
        // entries from a different config no longer describe this run
        if m.config_hash != cfg.hash() {
            m.stages.clear();
        }
        m.schema_version = SCHEMA_VERSION;
        m.tool_version = env!("CARGO_PKG_VERSION").into();
        m.config_hash = cfg.hash();
        m.seed = cfg.seed();
        let elapsed_ms = self.clock.elapsed().as_millis() as u64;
        log::info!("stage {} finished in {elapsed_ms} ms", self.name);
        m.stages.insert(
            self.name.into(),
            StageEntry {
                stage_seed: self.seed,
                inputs: self.inputs,
                outputs: self.outputs,
                started_at: self.started_at,
                elapsed_ms,
            },
        );
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::write(&path, e))
    }
}

fn read(path: &Path) -> Result<RunManifest> {
    if !path.exists() {
        return Ok(RunManifest::default());
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

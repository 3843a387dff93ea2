//! One module per pipeline stage, plus the artifact layout they share.

pub mod demo;
pub mod detect;
pub mod filter;
pub mod report;
pub mod score;
pub mod series;
pub mod topics;

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const FILTERED: &str = "filtered.jsonl";
pub const STATS: &str = "stats.json";
pub const SCORES: &str = "scores.csv";
pub const PROFILES: &str = "profiles.csv";
pub const COLLEGE_ATTRIBUTES: &str = "college_attributes.csv";
pub const COLLEGE_MODEL: &str = "college_model.json";
pub const TOPICS: &str = "topics.json";
pub const LDA_MODEL: &str = "lda_model.json";
pub const SERIES_DIR: &str = "series";
pub const SERIES_INDEX: &str = "series/index.json";
pub const SEGMENTATION: &str = "segmentation.json";
pub const REPORT_DIR: &str = "report";

/// Path of an upstream artifact, or a dependency error naming the command
/// that produces it.
pub fn require(cfg: &PipelineConfig, name: &str, command: &'static str) -> Result<PathBuf> {
    let p = cfg.out.join(name);
    if p.exists() {
        Ok(p)
    } else {
        Err(CliError::Dependency {
            artifact: p,
            command,
        })
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::write(path, e))
}

#[derive(Serialize)]
struct Versioned<'a, T> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with a top-level `schema_version`.
pub fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    let v = Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    };
    let text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::read(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<usize> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut n = 0;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::write(path, e))?;
        n += 1;
    }
    let bytes = w.into_inner().map_err(|e| CliError::write(path, e))?;
    write_text(path, &String::from_utf8(bytes).expect("csv output is utf-8"))?;
    Ok(n)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::read(path, e))
}

/// One row of `scores.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    pub author_id: String,
    pub created_at: DateTime<Utc>,
    pub compound: f64,
    pub pos: f64,
    pub neu: f64,
    pub neg: f64,
    pub polarity: String,
}

/// Reads `profiles.csv` into author id → profile.
pub fn read_profiles(
    path: &Path,
) -> Result<std::collections::BTreeMap<String, maskshift::demographics::DemographicProfile>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    let mut out = std::collections::BTreeMap::new();
    for row in r.records() {
        let row = row.map_err(|e| CliError::read(path, e))?;
        let vals: Vec<&str> = row.iter().skip(1).collect();
        let p = maskshift::demographics::DemographicProfile::from_values(&vals)
            .map_err(|e| CliError::read(path, e))?;
        out.insert(row[0].to_string(), p);
    }
    Ok(out)
}

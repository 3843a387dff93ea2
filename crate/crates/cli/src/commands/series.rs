use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use maskshift::changepoint::{build_series, Observation, SentimentSeries};
use maskshift::demographics::{ProfileFilter, PROFILE_FIELDS, UNKNOWN};

use super::{read_csv, read_profiles, require, write_json, write_text, ScoreRow};
use super::{PROFILES, SCORES, SERIES_DIR, SERIES_INDEX};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::manifest::StageRun;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub key: String,
    pub filter: String,
    pub file: String,
    pub days: usize,
    pub tweets: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesIndex {
    pub epoch: chrono::NaiveDate,
    pub end: chrono::NaiveDate,
    pub series: Vec<SeriesEntry>,
}

/// `all` plus one filter per known value of each profile field, in field
/// order.
fn default_filters(
    profiles: &BTreeMap<String, maskshift::demographics::DemographicProfile>,
) -> Vec<ProfileFilter> {
    let mut out = vec![ProfileFilter::all()];
    for (i, field) in PROFILE_FIELDS.iter().enumerate() {
        let values: BTreeSet<String> = profiles
            .values()
            .map(|p| p.values()[i].clone())
            .filter(|v| v != UNKNOWN)
            .collect();
        for v in values {
            out.push(format!("{field}={v}").parse().expect("observed values parse"));
        }
    }
    out
}

pub fn run(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = StageRun::start("series", cfg);
    let scores: Vec<ScoreRow> = read_csv(&require(cfg, SCORES, "score")?)?;
    let profiles = read_profiles(&require(cfg, PROFILES, "demo")?)?;
    stage.input(SCORES, scores.len());
    stage.input(PROFILES, profiles.len());

    let filters: Vec<ProfileFilter> = match &cfg.series.filters {
        Some(fs) => fs.iter().map(|f| f.parse().expect("validated")).collect(),
        None => default_filters(&profiles),
    };
    let epoch = cfg.series.epoch;
    let end = match cfg.series.end {
        Some(e) => e,
        None => scores
            .iter()
            .map(|s| s.created_at.date_naive())
            .max()
            .ok_or_else(|| CliError::Data("no scored tweets; cannot infer series end".into()))?,
    };
    let observations: Vec<Observation> = scores
        .iter()
        .map(|s| Observation {
            created_at: s.created_at,
            compound: s.compound,
            profile: profiles.get(&s.author_id),
        })
        .collect();

    let dir = cfg.out.join(SERIES_DIR);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(|e| CliError::write(&dir, e))?;
    }
    let mut index = SeriesIndex {
        epoch,
        end,
        series: Vec::new(),
    };
    let mut seen = BTreeSet::new();
    for f in filters {
        let key = f.key();
        if !seen.insert(key.clone()) {
            continue;
        }
        let s: SentimentSeries = build_series(observations.iter().copied(), &f, epoch, end)?;
        if s.degenerate {
            log::warn!("series {f} has no tweets");
        }
        let file = format!("{key}.csv");
        write_text(&dir.join(&file), &s.to_csv_string())?;
        index.series.push(SeriesEntry {
            key,
            filter: f.to_string(),
            file,
            days: s.len(),
            tweets: s.total_count(),
            degenerate: s.degenerate,
        });
    }
    write_json(&cfg.out.join(SERIES_INDEX), &index)?;
    stage.output("series", index.series.len());
    stage.finish(cfg)
}

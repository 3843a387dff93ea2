//! Figure data: label distributions, per-demographic mean sentiment, daily
//! series with segment shading, topic keywords, and a summary JSON.

use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use maskshift::changepoint::{MatchedEvent, SentimentSeries};
use maskshift::demographics::{label_distribution, DemographicProfile, PROFILE_FIELDS, UNKNOWN};
use maskshift::sentiment::{mean_compound, polarity, Polarity, SentimentScore};
use maskshift::topics::TopicReport;

use super::detect::SegmentationArtifact;
use super::series::SeriesIndex;
use super::{read_csv, read_json, read_profiles, require, write_csv, write_json, ScoreRow};
use super::{PROFILES, REPORT_DIR, SCORES, SEGMENTATION, SERIES_DIR, SERIES_INDEX, TOPICS};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::manifest::StageRun;

#[derive(Deserialize)]
struct TopicsArtifact {
    report: TopicReport,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PolarityCounts {
    pub positive: usize,
    pub neutral: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupSentiment {
    pub field: String,
    pub value: String,
    pub tweets: usize,
    pub mean_compound: f64,
    pub polarity: PolarityCounts,
}

#[derive(Serialize)]
struct ChangePoint {
    key: String,
    filter: String,
    index: usize,
    date: NaiveDate,
    matched: bool,
    events: Vec<MatchedEvent>,
}

#[derive(Serialize)]
struct TopicSummary {
    k: usize,
    coherence: f64,
}

#[derive(Serialize)]
struct Summary {
    tweets: usize,
    users: usize,
    overall: GroupSentiment,
    demographics: Vec<GroupSentiment>,
    topics: TopicSummary,
    change_points: Vec<ChangePoint>,
}

#[derive(Serialize)]
struct DistributionRow<'a> {
    field: &'a str,
    value: &'a str,
    users: usize,
}

#[derive(Serialize)]
struct MeanRow<'a> {
    field: &'a str,
    value: &'a str,
    tweets: usize,
    mean_compound: f64,
    positive: usize,
    neutral: usize,
    negative: usize,
}

#[derive(Serialize)]
struct TimeseriesRow<'a> {
    key: &'a str,
    day: usize,
    date: NaiveDate,
    value: f64,
    count: usize,
    interpolated: u8,
    segment: Option<usize>,
}

#[derive(Serialize)]
struct SegmentRow<'a> {
    key: &'a str,
    segment: usize,
    start: usize,
    end: usize,
    start_date: NaiveDate,
    end_date: NaiveDate,
    mean: f64,
    variance: f64,
}

#[derive(Serialize)]
struct KeywordRow<'a> {
    topic: usize,
    rank: usize,
    token: &'a str,
    count: u32,
    weight: f64,
}

fn group(field: &str, value: &str, rows: &[&ScoreRow]) -> Result<Option<GroupSentiment>> {
    if rows.is_empty() {
        return Ok(None);
    }
    let scores: Vec<SentimentScore> = rows
        .iter()
        .map(|r| SentimentScore {
            compound: r.compound,
            pos: r.pos,
            neu: r.neu,
            neg: r.neg,
        })
        .collect();
    let mut counts = PolarityCounts::default();
    for s in &scores {
        match polarity(s.compound)? {
            Polarity::Positive => counts.positive += 1,
            Polarity::Neutral => counts.neutral += 1,
            Polarity::Negative => counts.negative += 1,
        }
    }
    Ok(Some(GroupSentiment {
        field: field.into(),
        value: value.into(),
        tweets: rows.len(),
        mean_compound: mean_compound(&scores)?,
        polarity: counts,
    }))
}

/// Mean sentiment per value of every profile field, in field then value
/// order; tweets whose author has no profile count as `unknown`.
pub fn demographic_means(
    scores: &[ScoreRow],
    profiles: &BTreeMap<String, DemographicProfile>,
) -> Result<Vec<GroupSentiment>> {
    let unknown = DemographicProfile::default();
    let mut out = Vec::new();
    for (i, field) in PROFILE_FIELDS.iter().enumerate() {
        let mut by_value: BTreeMap<String, Vec<&ScoreRow>> = BTreeMap::new();
        for s in scores {
            let p = profiles.get(&s.author_id).unwrap_or(&unknown);
            by_value.entry(p.values()[i].clone()).or_default().push(s);
        }
        for (value, rows) in &by_value {
            out.extend(group(field, value, rows)?);
        }
    }
    Ok(out)
}

pub fn run(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = StageRun::start("report", cfg);
    let scores: Vec<ScoreRow> = read_csv(&require(cfg, SCORES, "score")?)?;
    let profiles = read_profiles(&require(cfg, PROFILES, "demo")?)?;
    let index: SeriesIndex = read_json(&require(cfg, SERIES_INDEX, "series")?)?;
    let seg: SegmentationArtifact = read_json(&require(cfg, SEGMENTATION, "detect")?)?;
    let topics: TopicsArtifact = read_json(&require(cfg, TOPICS, "topics")?)?;
    stage.input(SCORES, scores.len());
    stage.input(PROFILES, profiles.len());
    stage.input("series", index.series.len());

    let dir = cfg.out.join(REPORT_DIR);

    let hashed: HashMap<String, DemographicProfile> =
        profiles.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let dist = label_distribution(&hashed);
    let n = write_csv(
        &dir.join("distributions.csv"),
        dist.iter().map(|(field, value, users)| DistributionRow {
            field,
            value,
            users: *users,
        }),
    )?;
    stage.output("distributions.csv", n);

    let all: Vec<&ScoreRow> = scores.iter().collect();
    let overall = group("all", "all", &all)?
        .ok_or_else(|| CliError::Data("no scored tweets to report".into()))?;
    let groups = demographic_means(&scores, &profiles)?;
    let n = write_csv(
        &dir.join("demographic_means.csv"),
        std::iter::once(&overall).chain(&groups).map(|g| MeanRow {
            field: &g.field,
            value: &g.value,
            tweets: g.tweets,
            mean_compound: g.mean_compound,
            positive: g.polarity.positive,
            neutral: g.polarity.neutral,
            negative: g.polarity.negative,
        }),
    )?;
    stage.output("demographic_means.csv", n);

    let segmentations: BTreeMap<&str, _> = seg
        .results
        .iter()
        .filter_map(|r| r.segmentation.as_ref().map(|s| (r.key.as_str(), s)))
        .collect();
    let mut ts_rows = Vec::new();
    let mut seg_rows = Vec::new();
    for entry in &index.series {
        let path = cfg.out.join(SERIES_DIR).join(&entry.file);
        let file = std::fs::File::open(&path).map_err(|_| CliError::Dependency {
            artifact: path.clone(),
            command: "series",
        })?;
        let series = SentimentSeries::read_csv(file, &entry.filter)?;
        let report = segmentations.get(entry.key.as_str());
        for t in 1..=series.len() {
            let segment = report.and_then(|r| {
                r.segments
                    .iter()
                    .position(|s| s.start <= t && t <= s.end)
                    .map(|i| i + 1)
            });
            ts_rows.push(TimeseriesRow {
                key: &entry.key,
                day: t,
                date: series.date_of_day(t),
                value: series.values[t - 1],
                count: series.counts[t - 1],
                interpolated: series.interpolated[t - 1].into(),
                segment,
            });
        }
        if let Some(r) = report {
            for (i, s) in r.segments.iter().enumerate() {
                seg_rows.push(SegmentRow {
                    key: &entry.key,
                    segment: i + 1,
                    start: s.start,
                    end: s.end,
                    start_date: s.start_date,
                    end_date: s.end_date,
                    mean: s.mean,
                    variance: s.variance,
                });
            }
        }
    }
    let n = write_csv(&dir.join("timeseries.csv"), ts_rows)?;
    stage.output("timeseries.csv", n);
    let n = write_csv(&dir.join("segments.csv"), seg_rows)?;
    stage.output("segments.csv", n);

    let rep = &topics.report;
    let kw_rows = rep.topics.iter().flat_map(|t| {
        t.keywords.iter().enumerate().map(move |(i, k)| KeywordRow {
            topic: t.topic,
            rank: i + 1,
            token: &k.token,
            count: k.count,
            weight: k.weight,
        })
    });
    let n = write_csv(&dir.join("topic_keywords.csv"), kw_rows)?;
    stage.output("topic_keywords.csv", n);

    let change_points = seg
        .results
        .iter()
        .filter_map(|r| r.segmentation.as_ref().map(|s| (r, s)))
        .flat_map(|(r, s)| {
            s.events.iter().map(move |b| ChangePoint {
                key: r.key.clone(),
                filter: r.filter.clone(),
                index: b.index,
                date: b.date,
                matched: b.matched,
                events: b.events.clone(),
            })
        })
        .collect();
    let summary = Summary {
        tweets: scores.len(),
        users: profiles.len(),
        overall,
        demographics: groups.into_iter().filter(|g| g.value != UNKNOWN).collect(),
        topics: TopicSummary {
            k: rep.k,
            coherence: rep.coherence,
        },
        change_points,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    stage.output("summary.json", 1);
    stage.finish(cfg)
}

use serde::{Deserialize, Serialize};

use maskshift::changepoint::{
    associate_events, default_beta, pelt_series, ChangepointError, CostKind, CostModel,
    EventCatalog, SegmentationReport, SentimentSeries,
};

use super::series::SeriesIndex;
use super::{read_json, require, write_json, SEGMENTATION, SERIES_DIR, SERIES_INDEX};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::manifest::StageRun;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesResult {
    pub key: String,
    pub filter: String,
    /// `ok` or `degenerate`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<SegmentationReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentationArtifact {
    pub cost_model: CostKind,
    pub window_days: u32,
    pub results: Vec<SeriesResult>,
}

pub fn cost_model(cfg: &PipelineConfig) -> CostModel {
    let d = &cfg.detect;
    let kind: CostKind = d.cost.parse().expect("validated");
    let mut m = CostModel::new(kind);
    m.variance_floor = d.variance_floor;
    if let Some(len) = d.min_segment_len {
        m = m.with_min_segment_len(len);
    }
    m
}

pub fn run(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = StageRun::start("detect", cfg);
    let index: SeriesIndex = read_json(&require(cfg, SERIES_INDEX, "series")?)?;
    stage.input("series", index.series.len());
    let catalog = match &cfg.paths.events {
        Some(p) => EventCatalog::load(p)?,
        None => EventCatalog::bundled(),
    };
    let model = cost_model(cfg);
    let dir = cfg.out.join(SERIES_DIR);
    let mut results = Vec::new();
    let mut breakpoints = 0;
    for entry in &index.series {
        let path = dir.join(&entry.file);
        let file = std::fs::File::open(&path).map_err(|_| CliError::Dependency {
            artifact: path.clone(),
            command: "series",
        })?;
        let series = SentimentSeries::read_csv(file, &entry.filter)?;
        let beta = cfg.detect.beta.unwrap_or_else(|| default_beta(series.len()));
        let result = match pelt_series(&series, &model, beta, cfg.detect.force) {
            Ok(seg) => {
                breakpoints += seg.breakpoints.len();
                let events = associate_events(&seg, &series, &catalog, cfg.detect.window_days);
                SeriesResult {
                    key: entry.key.clone(),
                    filter: entry.filter.clone(),
                    status: "ok".into(),
                    message: None,
                    segmentation: Some(SegmentationReport::new(&series, &seg, &model, beta, events)),
                }
            }
            Err(ChangepointError::Degenerate(msg)) => SeriesResult {
                key: entry.key.clone(),
                filter: entry.filter.clone(),
                status: "degenerate".into(),
                message: Some(msg),
                segmentation: None,
            },
            Err(e) => return Err(e.into()),
        };
        results.push(result);
    }
    let artifact = SegmentationArtifact {
        cost_model: model.kind,
        window_days: cfg.detect.window_days,
        results,
    };
    write_json(&cfg.out.join(SEGMENTATION), &artifact)?;
    stage.output("breakpoints", breakpoints);
    stage.finish(cfg)
}

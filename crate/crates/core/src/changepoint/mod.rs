//! Daily sentiment series and exact penalized change-point detection.
//!
//! [`pelt`] minimizes the sum of segment costs plus `beta` per segment over
//! all segmentations; [`brute_force`] computes the same minimizer by
//! enumeration for short series and serves as its test oracle.

mod events;
mod segment;
mod series;

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use events::{associate_events, breakpoint_date, BreakpointEvents, Event, EventCatalog, MatchedEvent};
pub use segment::{
    brute_force, default_beta, objective, pelt, segment_cost, CostKind, CostModel, SegmentCosts,
    Segmentation, DEFAULT_ORACLE_LIMIT, TIE_TOLERANCE,
};
pub use series::{build_series, Observation, SentimentSeries, DEFAULT_EPOCH};

#[derive(Debug, Error)]
pub enum ChangepointError {
    #[error("{0}")]
    Contract(String),
    #[error("degenerate series: {0}")]
    Degenerate(String),
    #[error("series length {n} exceeds the exhaustive-search limit {limit}")]
    OracleLimit { n: usize, limit: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{what} line {line}: {message}")]
    Parse {
        what: &'static str,
        line: usize,
        message: String,
    },
}

/// [`pelt`] on a series, refusing degenerate series unless `force`.
pub fn pelt_series(
    series: &SentimentSeries,
    model: &CostModel,
    beta: f64,
    force: bool,
) -> Result<Segmentation, ChangepointError> {
    if series.degenerate && !force {
        return Err(ChangepointError::Degenerate(format!(
            "no tweets match filter {:?}",
            series.filter
        )));
    }
    pelt(&series.values, model, beta)
}

/// Segments every series; per-key failures (e.g. degenerate series) are
/// reported in place. Output is ordered by key.
pub fn scan(
    series: &BTreeMap<String, SentimentSeries>,
    model: &CostModel,
    beta: f64,
) -> BTreeMap<String, Result<Segmentation, ChangepointError>> {
    series
        .iter()
        .map(|(k, s)| (k.clone(), pelt_series(s, model, beta, false)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub start: usize,
    pub end: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakpointSummary {
    pub index: usize,
    pub date: NaiveDate,
}

/// Serializable description of one segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub filter: String,
    pub epoch: NaiveDate,
    pub n: usize,
    pub cost_model: CostKind,
    pub variance_floor: f64,
    pub min_segment_len: usize,
    pub beta: f64,
    pub objective: f64,
    pub breakpoints: Vec<BreakpointSummary>,
    pub segments: Vec<SegmentSummary>,
    pub events: Vec<BreakpointEvents>,
}

impl SegmentationReport {
    pub fn new(
        series: &SentimentSeries,
        seg: &Segmentation,
        model: &CostModel,
        beta: f64,
        events: Vec<BreakpointEvents>,
    ) -> Self {
        let segments = seg
            .segments(series.len())
            .into_iter()
            .map(|(s, t)| {
                let ys = &series.values[s - 1..t];
                let n = ys.len() as f64;
                let mean = ys.iter().sum::<f64>() / n;
                let variance = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
                SegmentSummary {
                    start: s,
                    end: t,
                    start_date: series.date_of_day(s),
                    end_date: series.date_of_day(t),
                    mean,
                    variance,
                }
            })
            .collect();
        Self {
            filter: series.filter.clone(),
            epoch: series.epoch,
            n: series.len(),
            cost_model: model.kind,
            variance_floor: model.variance_floor,
            min_segment_len: model.min_segment_len,
            beta,
            objective: seg.objective,
            breakpoints: seg
                .breakpoints
                .iter()
                .map(|&index| BreakpointSummary {
                    index,
                    date: breakpoint_date(series.epoch, index),
                })
                .collect(),
            segments,
            events,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>) -> SentimentSeries {
        let n = values.len();
        SentimentSeries {
            epoch: DEFAULT_EPOCH,
            values,
            counts: vec![1; n],
            interpolated: vec![false; n],
            filter: "all".into(),
            degenerate: false,
        }
    }

    #[test]
    fn scan_constant_series() {
        let set: BTreeMap<String, SentimentSeries> = ["c", "a", "b"]
            .iter()
            .map(|k| (k.to_string(), series(vec![0.1; 30])))
            .collect();
        let out = scan(&set, &CostModel::default(), 5.0);
        assert_eq!(out.keys().collect::<Vec<_>>(), ["a", "b", "c"]);
        assert!(out.values().all(|r| r.as_ref().unwrap().breakpoints.is_empty()));
    }

    #[test]
    fn degenerate_refused_unless_forced() {
        let mut s = series(vec![0.0; 10]);
        s.degenerate = true;
        assert!(matches!(
            pelt_series(&s, &CostModel::default(), 1.0, false),
            Err(ChangepointError::Degenerate(_))
        ));
        assert!(pelt_series(&s, &CostModel::default(), 1.0, true).is_ok());
    }

    #[test]
    fn report_segments() {
        let s = series(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let m = CostModel::new(CostKind::MeanShift);
        let seg = pelt(&s.values, &m, 0.1).unwrap();
        let r = SegmentationReport::new(&s, &seg, &m, 0.1, vec![]);
        assert_eq!(r.breakpoints[0].index, 3);
        assert_eq!(r.breakpoints[0].date.to_string(), "2020-01-30");
        assert_eq!(r.segments.len(), 2);
        assert_eq!(r.segments[1].mean, 1.0);
        assert_eq!(r.segments[1].start_date.to_string(), "2020-01-30");
    }
}

use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{ChangepointError, Segmentation, SentimentSeries};

const BUNDLED_EVENTS: &str = include_str!("../../../../data/events.csv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub date: NaiveDate,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCatalog {
    pub events: Vec<Event>,
}

impl EventCatalog {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_EVENTS).expect("bundled events parse")
    }

    /// Parses `date,label` CSV; events are kept sorted by date.
    pub fn parse(text: &str) -> Result<Self, ChangepointError> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let err = |line: usize, message: String| ChangepointError::Parse {
            what: "event catalog",
            line,
            message,
        };
        let header = r.headers().map_err(|e| err(1, e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != ["date", "label"] {
            return Err(err(1, "header must be date,label".into()));
        }
        let mut events = Vec::new();
        for (i, row) in r.records().enumerate() {
            let row = row.map_err(|e| err(i + 2, e.to_string()))?;
            let date = row[0]
                .parse()
                .map_err(|e| err(i + 2, format!("date {:?}: {e}", &row[0])))?;
            events.push(Event {
                date,
                label: row[1].to_string(),
            });
        }
        events.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.label.cmp(&b.label)));
        Ok(Self { events })
    }

    pub fn load(path: &Path) -> Result<Self, ChangepointError> {
        let text = std::fs::read_to_string(path).map_err(|source| ChangepointError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedEvent {
    pub date: NaiveDate,
    pub label: String,
    /// Event date minus breakpoint date, in days.
    pub offset_days: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakpointEvents {
    pub index: usize,
    /// First day of the new segment: `epoch + index` days.
    pub date: NaiveDate,
    pub events: Vec<MatchedEvent>,
    pub matched: bool,
}

/// Calendar date on which the segment after breakpoint `index` begins.
pub fn breakpoint_date(epoch: NaiveDate, index: usize) -> NaiveDate {
    epoch + Days::new(index as u64)
}

/// Attaches every catalog event within `window_days` (inclusive) of each
/// breakpoint date.
pub fn associate_events(
    seg: &Segmentation,
    series: &SentimentSeries,
    catalog: &EventCatalog,
    window_days: u32,
) -> Vec<BreakpointEvents> {
    seg.breakpoints
        .iter()
        .map(|&index| {
            let date = breakpoint_date(series.epoch, index);
            let events: Vec<MatchedEvent> = catalog
                .events
                .iter()
                .filter_map(|e| {
                    let offset = (e.date - date).num_days();
                    (offset.abs() <= i64::from(window_days)).then(|| MatchedEvent {
                        date: e.date,
                        label: e.label.clone(),
                        offset_days: offset,
                    })
                })
                .collect();
            BreakpointEvents {
                index,
                date,
                matched: !events.is_empty(),
                events,
            }
        })
        .collect()
}

use std::io::{Read, Write};

use chrono::{DateTime, Days, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::ChangepointError;
use crate::demographics::{DemographicProfile, ProfileFilter};

/// Default first day of the series.
pub const DEFAULT_EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(2020, 1, 27) {
    Some(d) => d,
    None => panic!("valid date"),
};

/// One scored tweet and its author's profile, if known.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub created_at: DateTime<Utc>,
    pub compound: f64,
    pub profile: Option<&'a DemographicProfile>,
}

/// Daily mean compound scores. Day `t` (1-based) is `epoch + (t - 1)` days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentSeries {
    pub epoch: NaiveDate,
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
    /// Days whose value was interpolated because no tweet matched.
    pub interpolated: Vec<bool>,
    pub filter: String,
    /// No day had any matching tweet.
    pub degenerate: bool,
}

impl SentimentSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Calendar date of 1-based day `t`.
    pub fn date_of_day(&self, t: usize) -> NaiveDate {
        self.epoch + Days::new(t.saturating_sub(1) as u64)
    }

    pub fn total_count(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Writes `date,value,count,interpolated_flag` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ChangepointError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| ChangepointError::Parse {
            what: "series",
            line: 0,
            message: e.to_string(),
        };
        w.write_record(["date", "value", "count", "interpolated_flag"]).map_err(io)?;
        for t in 0..self.len() {
            w.write_record([
                self.date_of_day(t + 1).to_string(),
                format!("{}", self.values[t]),
                self.counts[t].to_string(),
                u8::from(self.interpolated[t]).to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| io(e.into()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads a series written by [`write_csv`](Self::write_csv). Days must
    /// be consecutive.
    pub fn read_csv<R: Read>(input: R, filter: &str) -> Result<Self, ChangepointError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let err = |line: usize, message: String| ChangepointError::Parse {
            what: "series",
            line,
            message,
        };
        let header = r.headers().map_err(|e| err(1, e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != ["date", "value", "count", "interpolated_flag"] {
            return Err(err(1, "header must be date,value,count,interpolated_flag".into()));
        }
        let mut s = SentimentSeries {
            epoch: DEFAULT_EPOCH,
            values: vec![],
            counts: vec![],
            interpolated: vec![],
            filter: filter.to_string(),
            degenerate: false,
        };
        for (i, row) in r.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| err(line, e.to_string()))?;
            let date: NaiveDate = row[0].parse().map_err(|e| err(line, format!("date: {e}")))?;
            if i == 0 {
                s.epoch = date;
            } else if date != s.date_of_day(i + 1) {
                return Err(err(line, format!("expected date {}", s.date_of_day(i + 1))));
            }
            s.values.push(row[1].parse().map_err(|e| err(line, format!("value: {e}")))?);
            s.counts.push(row[2].parse().map_err(|e| err(line, format!("count: {e}")))?);
            s.interpolated.push(match &row[3] {
                "0" | "false" => false,
                "1" | "true" => true,
                other => return Err(err(line, format!("interpolated_flag {other:?}"))),
            });
        }
        s.degenerate = s.counts.iter().all(|&c| c == 0);
        Ok(s)
    }
}

/// Aggregates observations matching `filter` into daily means over
/// `epoch..=end`. Observations outside the range are ignored. Days without
/// tweets are linearly interpolated between the nearest observed days (the
/// nearest observed value at either end) and flagged.
pub fn build_series<'a, I>(
    observations: I,
    filter: &ProfileFilter,
    epoch: NaiveDate,
    end: NaiveDate,
) -> Result<SentimentSeries, ChangepointError>
where
    I: IntoIterator<Item = Observation<'a>>,
{
    if end < epoch {
        return Err(ChangepointError::Contract(format!(
            "empty date range {epoch}..={end}"
        )));
    }
    let n = (end - epoch).num_days() as usize + 1;
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for o in observations {
        if !filter.matches(o.profile) {
            continue;
        }
        let day = (o.created_at.date_naive() - epoch).num_days();
        if day < 0 || day as usize >= n {
            continue;
        }
        sums[day as usize] += o.compound;
        counts[day as usize] += 1;
    }
    let observed: Vec<usize> = (0..n).filter(|&t| counts[t] > 0).collect();
    let mut values: Vec<f64> = (0..n)
        .map(|t| if counts[t] > 0 { sums[t] / counts[t] as f64 } else { 0.0 })
        .collect();
    let interpolated: Vec<bool> = counts.iter().map(|&c| c == 0).collect();
    if let (Some(&first), Some(&last)) = (observed.first(), observed.last()) {
        for t in 0..first {
            values[t] = values[first];
        }
        for t in last + 1..n {
            values[t] = values[last];
        }
        for w in observed.windows(2) {
            let (a, b) = (w[0], w[1]);
            for t in a + 1..b {
                values[t] = values[a] + (values[b] - values[a]) * (t - a) as f64 / (b - a) as f64;
            }
        }
    }
    Ok(SentimentSeries {
        epoch,
        values,
        counts,
        interpolated,
        filter: filter.to_string(),
        degenerate: observed.is_empty(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn at(day: u32, compound: f64) -> Observation<'static> {
        Observation {
            created_at: Utc.with_ymd_and_hms(2020, 1, 27 + day, 12, 0, 0).unwrap(),
            compound,
            profile: None,
        }
    }

    fn end(days: u64) -> NaiveDate {
        DEFAULT_EPOCH + Days::new(days)
    }

    #[test]
    fn daily_mean_and_interpolation() {
        let obs = [at(0, 0.2), at(0, -0.2), at(2, 0.6), at(3, 0.8)];
        let s = build_series(obs, &ProfileFilter::all(), DEFAULT_EPOCH, end(4)).unwrap();
        assert_eq!(s.counts, [2, 0, 1, 1, 0]);
        assert_eq!(s.values[0], 0.0);
        assert!((s.values[1] - 0.3).abs() < 1e-12);
        assert_eq!(s.values[4], 0.8);
        assert_eq!(s.interpolated, [false, true, false, false, true]);
        assert!(!s.degenerate);
    }

    #[test]
    fn nothing_matching_is_degenerate() {
        let f: ProfileFilter = "party=Democrat".parse().unwrap();
        let s = build_series([at(0, 0.5)], &f, DEFAULT_EPOCH, end(2)).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.counts, [0, 0, 0]);
    }

    #[test]
    fn reversed_range_is_rejected() {
        assert!(build_series([], &ProfileFilter::all(), end(3), DEFAULT_EPOCH).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let obs = [at(0, 0.25), at(2, -0.5)];
        let s = build_series(obs, &ProfileFilter::all(), DEFAULT_EPOCH, end(2)).unwrap();
        let text = s.to_csv_string();
        assert!(text.starts_with("date,value,count,interpolated_flag\n2020-01-27,0.25,1,0\n"));
        let back = SentimentSeries::read_csv(text.as_bytes(), "all").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn day_dates() {
        let s = build_series([], &ProfileFilter::all(), DEFAULT_EPOCH, end(70)).unwrap();
        assert_eq!(s.date_of_day(1), DEFAULT_EPOCH);
        assert_eq!(s.date_of_day(67).to_string(), "2020-04-02");
    }
}

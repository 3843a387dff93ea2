//! Externally inferred age, gender and organization scores.

use std::collections::HashMap;
use std::path::Path;

use super::{AgeBucket, DemographicsError, Gender};

const HEADER: [&str; 4] = ["author_id", "age_bucket", "gender", "org_probability"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    pub age_bucket: Option<AgeBucket>,
    pub gender: Option<Gender>,
    pub org_probability: f64,
}

pub type Annotations = HashMap<String, Annotation>;

/// A row that was skipped, with its 1-based file line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    pub line: usize,
    pub message: String,
}

pub fn ingest_annotations(path: &Path) -> Result<(Annotations, Vec<RowIssue>), DemographicsError> {
    let text = std::fs::read_to_string(path).map_err(|e| DemographicsError::io(path, e))?;
    parse_annotations(&text)
}

/// Parses `author_id,age_bucket,gender,org_probability`. Rows with an
/// invalid bucket, gender or probability are skipped and reported; the
/// literal `unknown` is accepted for age and gender.
pub fn parse_annotations(text: &str) -> Result<(Annotations, Vec<RowIssue>), DemographicsError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| DemographicsError::Row {
            what: "annotations",
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(DemographicsError::Header {
            what: "annotations",
            expected: HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = HashMap::new();
    let mut issues = Vec::new();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                issues.push(RowIssue {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        match parse_row(&row) {
            Ok((id, ann)) => {
                out.insert(id, ann);
            }
            Err(message) => {
                log::warn!("annotations line {line}: {message}; row skipped");
                issues.push(RowIssue { line, message });
            }
        }
    }
    Ok((out, issues))
}

fn parse_row(row: &csv::StringRecord) -> Result<(String, Annotation), String> {
    if row.len() != HEADER.len() {
        return Err(format!("expected {} columns, found {}", HEADER.len(), row.len()));
    }
    let id = row[0].to_string();
    if id.is_empty() {
        return Err("empty author_id".into());
    }
    let opt = |s: &str| s.eq_ignore_ascii_case("unknown") || s.is_empty();
    let age_bucket = if opt(&row[1]) {
        None
    } else {
        Some(row[1].parse::<AgeBucket>()?)
    };
    let gender = if opt(&row[2]) {
        None
    } else {
        Some(row[2].parse::<Gender>()?)
    };
    let org_probability: f64 = row[3]
        .parse()
        .ok()
        .filter(|p: &f64| (0.0..=1.0).contains(p))
        .ok_or_else(|| format!("org_probability {:?} is not in [0, 1]", &row[3]))?;
    Ok((
        id,
        Annotation {
            age_bucket,
            gender,
            org_probability,
        },
    ))
}

//! Per-user demographic attribution.
//!
//! Every label is optional: a field stays unknown unless the evidence it is
//! derived from was supplied. Rendered tables spell missing labels
//! `unknown`.

mod annotations;
mod college;
mod forest;
mod geo;
mod names;
mod party;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use annotations::{ingest_annotations, parse_annotations, Annotation, Annotations, RowIssue};
pub use college::{
    predict_college, rank_attributes, tfidf, token_counts, train_college, AttributePattern,
    CollegeClassifier, OverrideRule, TfidfVectorizer,
};
pub use forest::{ForestParams, RandomForest};
pub use geo::{
    income_bracket, locate, metro_class, GeoTable, Location, NATIONAL_MEDIAN_INCOME_2018,
};
pub use names::{
    classify_ethnicity, group_ethnicity, parse_name, EthnicityProfile, GroupTable, NameClassifier,
    NameRules, NgramNameModel, ParsedName, PROFILE_COUNT,
};
pub use party::{infer_party, PartyDirectory};

#[derive(Debug, Error)]
pub enum DemographicsError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{what}: header must be {expected:?}, found {found:?}")]
    Header {
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("{what} line {line}: {message}")]
    Row {
        what: &'static str,
        line: usize,
        message: String,
    },
    #[error("degenerate training data: {0}")]
    Degenerate(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model container: {0}")]
    Model(String),
}

impl DemographicsError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Case-insensitive parsing and canonical spelling for label enums.
macro_rules! label_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal $(| $alias:literal)*),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                let t = s.trim();
                $(
                    if t.eq_ignore_ascii_case($text) $(|| t.eq_ignore_ascii_case($alias))* {
                        return Ok($name::$variant);
                    }
                )+
                Err(format!("{t:?} is not a valid {}", stringify!($name)))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}
pub(crate) use label_enum;

label_enum!(AgeBucket {
    UpTo18 => "<=18" | "≤18",
    From19To29 => "19-29",
    From30To39 => "30-39",
    AtLeast40 => ">=40" | "≥40",
});

label_enum!(Gender {
    Male => "male",
    Female => "female",
});

label_enum!(EthnicityGroup {
    European => "European",
    Hispanic => "Hispanic",
    African => "African",
    EastAsian => "EastAsian",
    Indian => "Indian",
});

label_enum!(Region {
    Northeast => "Northeast",
    Midwest => "Midwest",
    South => "South",
    West => "West",
});

label_enum!(MetroClass {
    Metro => "Metro",
    NonMetro => "NonMetro",
});

label_enum!(IncomeBracket {
    Above => "Above",
    Equal => "Equal",
    Below => "Below",
});

label_enum!(Party {
    Democrat => "Democrat",
    Republican => "Republican",
});

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemographicProfile {
    pub age_bucket: Option<AgeBucket>,
    pub gender: Option<Gender>,
    pub is_college: Option<bool>,
    pub ethnicity_group: Option<EthnicityGroup>,
    pub region: Option<Region>,
    pub metro_class: Option<MetroClass>,
    pub income_bracket: Option<IncomeBracket>,
    pub party: Option<Party>,
}

/// Column order used by profile tables and filters.
pub const PROFILE_FIELDS: [&str; 8] = [
    "age_bucket",
    "gender",
    "is_college",
    "ethnicity_group",
    "region",
    "metro_class",
    "income_bracket",
    "party",
];

pub const UNKNOWN: &str = "unknown";

fn show<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| UNKNOWN.to_string(), T::to_string)
}

fn read_opt<T: FromStr<Err = String>>(s: &str) -> Result<Option<T>, String> {
    if s.trim().eq_ignore_ascii_case(UNKNOWN) || s.trim().is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

impl DemographicProfile {
    /// Field values in [`PROFILE_FIELDS`] order.
    pub fn values(&self) -> [String; 8] {
        [
            show(&self.age_bucket),
            show(&self.gender),
            show(&self.is_college),
            show(&self.ethnicity_group),
            show(&self.region),
            show(&self.metro_class),
            show(&self.income_bracket),
            show(&self.party),
        ]
    }

    pub fn get(&self, field: &str) -> Option<String> {
        let idx = PROFILE_FIELDS.iter().position(|f| *f == field)?;
        Some(self.values()[idx].clone())
    }

    /// Inverse of [`values`](Self::values).
    pub fn from_values(values: &[&str]) -> Result<Self, String> {
        if values.len() != PROFILE_FIELDS.len() {
            return Err(format!("expected {} fields", PROFILE_FIELDS.len()));
        }
        let college = match values[2].trim() {
            "true" => Some(true),
            "false" => Some(false),
            s if s.eq_ignore_ascii_case(UNKNOWN) || s.is_empty() => None,
            s => return Err(format!("{s:?} is not a valid is_college")),
        };
        Ok(Self {
            age_bucket: read_opt(values[0])?,
            gender: read_opt(values[1])?,
            is_college: college,
            ethnicity_group: read_opt(values[3])?,
            region: read_opt(values[4])?,
            metro_class: read_opt(values[5])?,
            income_bracket: read_opt(values[6])?,
            party: read_opt(values[7])?,
        })
    }
}

/// Conjunction of `field=value` constraints over profile fields; the
/// empty filter (`all`) matches every record, including those without a
/// profile.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProfileFilter {
    clauses: Vec<(String, String)>,
}

impl ProfileFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn is_all(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn matches(&self, profile: Option<&DemographicProfile>) -> bool {
        if self.clauses.is_empty() {
            return true;
        }
        let Some(p) = profile else { return false };
        self.clauses
            .iter()
            .all(|(field, want)| p.get(field).is_some_and(|v| v.eq_ignore_ascii_case(want)))
    }

    /// Stable key usable as a file stem, e.g. `party-Republican`.
    pub fn key(&self) -> String {
        if self.clauses.is_empty() {
            return "all".into();
        }
        self.clauses
            .iter()
            .map(|(f, v)| format!("{f}-{v}"))
            .collect::<Vec<_>>()
            .join("_")
            .replace(['<', '>', '=', '/', ' '], "")
    }
}

impl FromStr for ProfileFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("all") {
            return Ok(Self::all());
        }
        let mut clauses = Vec::new();
        for clause in s.split(',') {
            let (field, value) = clause
                .split_once('=')
                .ok_or_else(|| format!("filter clause {clause:?} must be field=value"))?;
            let (field, value) = (field.trim(), value.trim());
            let field = match field {
                "age" => "age_bucket",
                "college" => "is_college",
                "ethnicity" => "ethnicity_group",
                "metro" => "metro_class",
                "income" => "income_bracket",
                other => other,
            };
            if !PROFILE_FIELDS.contains(&field) {
                return Err(format!("unknown profile field {field:?}"));
            }
            // validate the value by round-tripping through the profile parser
            let mut probe = vec![UNKNOWN; PROFILE_FIELDS.len()];
            let idx = PROFILE_FIELDS.iter().position(|f| *f == field).unwrap();
            probe[idx] = value;
            let parsed = DemographicProfile::from_values(&probe)?;
            let canonical = parsed.values()[idx].clone();
            clauses.push((field.to_string(), canonical));
        }
        Ok(Self { clauses })
    }
}

impl fmt::Display for ProfileFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("all");
        }
        let parts: Vec<_> = self.clauses.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Everything known about one user before attribution.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct UserEvidence {
    pub author_id: String,
    #[serde(default)]
    pub display_name: Option<String>,
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub following: Option<Vec<String>>,
}

/// Lookup tables and models used by [`Attributor::attribute`]. Any source
/// left `None` leaves its fields unknown.
#[derive(Default)]
pub struct Attributor<'a> {
    pub annotations: Option<&'a Annotations>,
    pub college: Option<&'a CollegeClassifier>,
    pub names: Option<(&'a dyn NameClassifier, &'a GroupTable, &'a NameRules)>,
    pub geo: Option<(&'a GeoTable, u64)>,
    pub party: Option<&'a PartyDirectory>,
}

impl Attributor<'_> {
    /// `timeline` holds the user's tokenized tweets (for the college model
    /// and the political keyword gate).
    pub fn attribute(
        &self,
        user: &UserEvidence,
        timeline: Option<&[Vec<String>]>,
    ) -> Result<DemographicProfile, DemographicsError> {
        let mut p = DemographicProfile::default();
        if let Some(a) = self.annotations.and_then(|m| m.get(&user.author_id)) {
            p.age_bucket = a.age_bucket;
            p.gender = a.gender;
        }
        if let (Some(model), Some(tl)) = (self.college, timeline) {
            let flat: Vec<String> = tl.iter().flatten().cloned().collect();
            p.is_college = Some(model.predict(&flat));
        }
        if let (Some((clf, groups, rules)), Some(name)) = (self.names, &user.display_name) {
            if let Some(parsed) = parse_name(name, rules) {
                let dist = classify_ethnicity(&parsed, clf)?;
                p.ethnicity_group = group_ethnicity(&dist, clf.profiles(), groups);
            }
        }
        if let (Some((geo, median)), Some(loc)) = (self.geo, &user.location) {
            if let Some(found) = locate(loc, geo, median) {
                p.region = found.region;
                p.metro_class = found.metro_class;
                p.income_bracket = found.income_bracket;
            }
        }
        if let (Some(dir), Some(tl), Some(following)) = (self.party, timeline, &user.following) {
            p.party = infer_party(tl, following, dir);
        }
        Ok(p)
    }
}

/// Counts of each label value per field, for distribution plots.
pub fn label_distribution(
    profiles: &HashMap<String, DemographicProfile>,
) -> Vec<(String, String, usize)> {
    let mut counts: std::collections::BTreeMap<(usize, String), usize> = Default::default();
    for p in profiles.values() {
        for (i, v) in p.values().into_iter().enumerate() {
            *counts.entry((i, v)).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|((i, v), n)| (PROFILE_FIELDS[i].to_string(), v, n))
        .collect()
}

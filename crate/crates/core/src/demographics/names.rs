//! Display-name parsing and name-based ethnicity profiles.
//!
//! A [`NameClassifier`] maps a parsed first/last name to a distribution over
//! twelve source profiles, which a [`GroupTable`] folds into five groups.
//! The bundled [`NgramNameModel`] is a character n-gram naive Bayes model.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{label_enum, DemographicsError, EthnicityGroup};

const BUNDLED_GROUPS: &str = include_str!("../../../../data/ethnicity_groups.csv");
const MODEL_FORMAT: &str = "maskshift-name-ngram-nb";
const MODEL_VERSION: u32 = 1;

pub const PROFILE_COUNT: usize = 12;

label_enum!(EthnicityProfile {
    British => "British",
    WestEuropean => "WestEuropean",
    Germanic => "Germanic",
    EastEuropean => "EastEuropean",
    Italian => "Italian",
    Nordic => "Nordic",
    Jewish => "Jewish",
    Hispanic => "Hispanic",
    African => "African",
    Muslim => "Muslim",
    EastAsian => "EastAsian",
    Indian => "Indian",
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedName {
    pub first: String,
    pub last: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameRules {
    pub titles: BTreeSet<String>,
    pub max_token_len: usize,
    pub max_tokens: usize,
}

impl Default for NameRules {
    fn default() -> Self {
        let titles = [
            "mr", "mrs", "ms", "miss", "mx", "dr", "prof", "professor", "sir", "dame", "lady",
            "lord", "rev", "fr", "hon", "sen", "rep", "gov", "capt", "sgt", "jr", "sr", "ii",
            "iii", "iv", "phd", "md", "esq",
        ];
        Self {
            titles: titles.into_iter().map(String::from).collect(),
            max_token_len: 20,
            max_tokens: 5,
        }
    }
}

/// Extracts `(first, last)` from a display name, or `None` when the name
/// does not look like a person's name.
///
/// Decorations without letters (emoji, punctuation) are ignored and titles
/// are dropped. The name is rejected when fewer than two words remain, when
/// more than `max_tokens` remain (sentences used as names), when any word is
/// longer than `max_token_len`, or when a word contains digits. Middle
/// words are discarded.
pub fn parse_name(display_name: &str, rules: &NameRules) -> Option<ParsedName> {
    let mut words = Vec::new();
    for raw in display_name.split_whitespace() {
        let w = raw
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        if w.is_empty() {
            continue;
        }
        if w.chars().any(|c| c.is_numeric()) {
            return None;
        }
        if !w.chars().all(|c| c.is_alphabetic() || c == '-' || c == '\'' || c == '.') {
            return None;
        }
        if rules.titles.contains(w.trim_end_matches('.')) {
            continue;
        }
        words.push(w);
    }
    if words.len() < 2 || words.len() > rules.max_tokens {
        return None;
    }
    if words.iter().any(|w| w.chars().count() > rules.max_token_len) {
        return None;
    }
    let first = words[0].trim_end_matches('.').to_string();
    let last = words[words.len() - 1].trim_end_matches('.').to_string();
    if first.chars().count() < 2 || last.chars().count() < 2 {
        return None;
    }
    Some(ParsedName { first, last })
}

pub trait NameClassifier: Send + Sync {
    /// Profile order of the distributions this model returns.
    fn profiles(&self) -> &[EthnicityProfile];

    /// Unnormalized or normalized nonnegative weights, one per profile.
    fn weights(&self, name: &ParsedName) -> Vec<f64>;
}

/// Normalized profile distribution for `name`.
pub fn classify_ethnicity(
    name: &ParsedName,
    model: &dyn NameClassifier,
) -> Result<Vec<f64>, DemographicsError> {
    let w = model.weights(name);
    if model.profiles().len() != PROFILE_COUNT || w.len() != PROFILE_COUNT {
        return Err(DemographicsError::Config(format!(
            "name model must score {PROFILE_COUNT} profiles, got {}",
            w.len()
        )));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(DemographicsError::Config("name model returned invalid weights".into()));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Ok(vec![1.0 / PROFILE_COUNT as f64; PROFILE_COUNT]);
    }
    Ok(w.iter().map(|v| v / total).collect())
}

/// Profile to group mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    map: HashMap<EthnicityProfile, EthnicityGroup>,
}

impl GroupTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_GROUPS).expect("bundled group table parses")
    }

    /// Parses `profile,group` rows after a header.
    pub fn parse(text: &str) -> Result<Self, DemographicsError> {
        let mut map = HashMap::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let row = |message: String| DemographicsError::Row {
                what: "ethnicity groups",
                line: idx + 1,
                message,
            };
            let (p, g) = line
                .split_once(',')
                .ok_or_else(|| row("expected profile,group".into()))?;
            map.insert(p.parse().map_err(row)?, g.parse().map_err(row)?);
        }
        Ok(Self { map })
    }

    pub fn load(path: &Path) -> Result<Self, DemographicsError> {
        let text = std::fs::read_to_string(path).map_err(|e| DemographicsError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn group(&self, p: EthnicityProfile) -> Option<EthnicityGroup> {
        self.map.get(&p).copied()
    }
}

impl Default for GroupTable {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Sums profile mass per group and returns the heaviest group; an exact
/// tie for the top (within 1e-12) is unknown.
pub fn group_ethnicity(
    distribution: &[f64],
    profiles: &[EthnicityProfile],
    table: &GroupTable,
) -> Option<EthnicityGroup> {
    let mut mass = [0.0f64; 5];
    for (p, &w) in profiles.iter().zip(distribution) {
        if let Some(g) = table.group(*p) {
            mass[EthnicityGroup::ALL.iter().position(|x| *x == g).unwrap()] += w;
        }
    }
    let max = mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return None;
    }
    let top: Vec<usize> = (0..5).filter(|&i| (mass[i] - max).abs() <= 1e-12).collect();
    match top.as_slice() {
        [only] => Some(EthnicityGroup::ALL[*only]),
        _ => None,
    }
}

/// Multinomial naive Bayes over character n-grams of the first and last
/// name (padded with `^`/`$`), with Laplace smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramNameModel {
    min_n: usize,
    max_n: usize,
    smoothing: f64,
    profiles: Vec<EthnicityProfile>,
    class_counts: Vec<usize>,
    /// feature -> per-profile count
    feature_counts: HashMap<String, Vec<u32>>,
    totals: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ModelContainer {
    format: String,
    version: u32,
    model: NgramNameModel,
}

fn ngrams(name: &ParsedName, min_n: usize, max_n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for (tag, part) in [('f', &name.first), ('l', &name.last)] {
        let chars: Vec<char> = format!("^{part}$").chars().collect();
        for n in min_n..=max_n {
            for w in chars.windows(n) {
                let mut s = String::with_capacity(n + 2);
                s.push(tag);
                s.push(':');
                s.extend(w);
                out.push(s);
            }
        }
    }
    out
}

impl NgramNameModel {
    /// Trains on `(name, profile)` pairs.
    pub fn train(examples: &[(ParsedName, EthnicityProfile)]) -> Result<Self, DemographicsError> {
        let profiles = EthnicityProfile::ALL.to_vec();
        let (min_n, max_n) = (1, 4);
        let mut class_counts = vec![0usize; PROFILE_COUNT];
        let mut feature_counts: HashMap<String, Vec<u32>> = HashMap::new();
        let mut totals = vec![0u64; PROFILE_COUNT];
        for (name, profile) in examples {
            let c = profiles.iter().position(|p| p == profile).unwrap();
            class_counts[c] += 1;
            for f in ngrams(name, min_n, max_n) {
                feature_counts.entry(f).or_insert_with(|| vec![0; PROFILE_COUNT])[c] += 1;
                totals[c] += 1;
            }
        }
        if class_counts.iter().filter(|&&c| c > 0).count() < 2 {
            return Err(DemographicsError::Degenerate(
                "name model needs examples from at least 2 profiles".into(),
            ));
        }
        Ok(Self {
            min_n,
            max_n,
            smoothing: 1.0,
            profiles,
            class_counts,
            feature_counts,
            totals,
        })
    }

    /// Trains from a `full_name,profile` CSV. Names that fail
    /// [`parse_name`] are skipped.
    pub fn train_csv(text: &str, rules: &NameRules) -> Result<Self, DemographicsError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut examples = Vec::new();
        for (idx, row) in reader.records().enumerate() {
            let row = row.map_err(|e| DemographicsError::Row {
                what: "labeled names",
                line: idx + 2,
                message: e.to_string(),
            })?;
            let profile: EthnicityProfile =
                row.get(1).unwrap_or("").parse().map_err(|message| DemographicsError::Row {
                    what: "labeled names",
                    line: idx + 2,
                    message,
                })?;
            if let Some(name) = parse_name(row.get(0).unwrap_or(""), rules) {
                examples.push((name, profile));
            }
        }
        Self::train(&examples)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelContainer {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DemographicsError> {
        let c: ModelContainer =
            serde_json::from_str(text).map_err(|e| DemographicsError::Model(e.to_string()))?;
        if c.format != MODEL_FORMAT || c.version != MODEL_VERSION {
            return Err(DemographicsError::Model(format!(
                "unsupported container {} v{}",
                c.format, c.version
            )));
        }
        Ok(c.model)
    }

    /// Loads a saved model; a missing file is a configuration error.
    pub fn load(path: &Path) -> Result<Self, DemographicsError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            DemographicsError::Config(format!("name model {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    fn log_posteriors(&self, name: &ParsedName) -> Vec<f64> {
        let n_docs: usize = self.class_counts.iter().sum();
        let vocab = self.feature_counts.len() as f64;
        let k = self.profiles.len() as f64;
        let mut scores: Vec<f64> = self
            .class_counts
            .iter()
            .map(|&c| ((c as f64 + 1.0) / (n_docs as f64 + k)).ln())
            .collect();
        for f in ngrams(name, self.min_n, self.max_n) {
            let Some(counts) = self.feature_counts.get(&f) else {
                continue;
            };
            for (c, score) in scores.iter_mut().enumerate() {
                let num = counts[c] as f64 + self.smoothing;
                let den = self.totals[c] as f64 + self.smoothing * vocab;
                *score += (num / den).ln();
            }
        }
        scores
    }
}

impl NameClassifier for NgramNameModel {
    fn profiles(&self) -> &[EthnicityProfile] {
        &self.profiles
    }

    fn weights(&self, name: &ParsedName) -> Vec<f64> {
        let logp = self.log_posteriors(name);
        let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        logp.iter().map(|l| (l - max).exp()).collect()
    }
}

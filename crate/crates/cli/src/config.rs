//! Pipeline configuration file (TOML).
//!
//! Relative paths are resolved against the directory holding the config
//! file. Command-line flags override `out` and `seed`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub filter: FilterSection,
    pub hydrate: Option<HydrateSection>,
    /// Scoring rule overrides, e.g. `caps_boost = 0.7`.
    #[serde(default)]
    pub sentiment: BTreeMap<String, toml::Value>,
    #[serde(default)]
    pub demographics: DemographicsSection,
    #[serde(default)]
    pub topics: TopicsSection,
    #[serde(default)]
    pub series: SeriesSection,
    #[serde(default)]
    pub detect: DetectSection,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub terms: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub emoji_lexicon: Option<PathBuf>,
    pub org_scores: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub timelines: Option<PathBuf>,
    pub college_labels: Option<PathBuf>,
    pub labeled_names: Option<PathBuf>,
    pub name_model: Option<PathBuf>,
    pub ethnicity_groups: Option<PathBuf>,
    pub geo_cities: Option<PathBuf>,
    pub geo_incomes: Option<PathBuf>,
    pub geo_rucc: Option<PathBuf>,
    pub geo_regions: Option<PathBuf>,
    pub party_accounts: Option<PathBuf>,
    pub political_keywords: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub custom_stopwords: Option<PathBuf>,
    pub pos_lexicon: Option<PathBuf>,
    pub events: Option<PathBuf>,
}

impl Paths {
    fn all_mut(&mut self) -> [(&'static str, &mut Option<PathBuf>); 22] {
        [
            ("corpus", &mut self.corpus),
            ("terms", &mut self.terms),
            ("lexicon", &mut self.lexicon),
            ("emoji_lexicon", &mut self.emoji_lexicon),
            ("org_scores", &mut self.org_scores),
            ("annotations", &mut self.annotations),
            ("users", &mut self.users),
            ("timelines", &mut self.timelines),
            ("college_labels", &mut self.college_labels),
            ("labeled_names", &mut self.labeled_names),
            ("name_model", &mut self.name_model),
            ("ethnicity_groups", &mut self.ethnicity_groups),
            ("geo_cities", &mut self.geo_cities),
            ("geo_incomes", &mut self.geo_incomes),
            ("geo_rucc", &mut self.geo_rucc),
            ("geo_regions", &mut self.geo_regions),
            ("party_accounts", &mut self.party_accounts),
            ("political_keywords", &mut self.political_keywords),
            ("stopwords", &mut self.stopwords),
            ("custom_stopwords", &mut self.custom_stopwords),
            ("pos_lexicon", &mut self.pos_lexicon),
            ("events", &mut self.events),
        ]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub lang: String,
    pub org_threshold: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            lang: "en".into(),
            org_threshold: 0.5,
        }
    }
}

/// Builds the corpus by hydrating stored ids instead of reading
/// `paths.corpus`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydrateSection {
    pub ids: PathBuf,
    /// `fixture` (local JSONL of tweet objects) or `http`.
    pub backend: String,
    pub fixture: Option<PathBuf>,
    #[serde(default = "default_attempts")]
    pub attempts: u32,
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
    #[serde(default)]
    pub min_interval_ms: u64,
}

fn default_attempts() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemographicsSection {
    pub national_median: u64,
    pub n_trees: usize,
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub override_terms: Vec<String>,
    pub override_min_count: usize,
    /// Number of top-ranked attribute phrases used as TF-IDF terms.
    pub college_vocabulary: usize,
    /// Candidate phrases; by default every `my <word>` seen in labeled
    /// timelines.
    pub college_candidates: Option<Vec<String>>,
}

impl Default for DemographicsSection {
    fn default() -> Self {
        Self {
            national_median: maskshift::demographics::NATIONAL_MEDIAN_INCOME_2018,
            n_trees: 100,
            max_features: None,
            max_depth: None,
            min_samples_split: 2,
            override_terms: vec!["professor".into(), "textbook".into()],
            override_min_count: 5,
            college_vocabulary: 30,
            college_candidates: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopicsSection {
    pub candidates: Vec<usize>,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub top_m: usize,
    pub top_keywords: usize,
    pub top_examples: usize,
    pub ngram_min_count: usize,
    pub ngram_threshold: f64,
}

impl Default for TopicsSection {
    fn default() -> Self {
        Self {
            candidates: vec![2, 3, 4, 5, 6],
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            top_m: 10,
            top_keywords: 10,
            top_examples: 3,
            ngram_min_count: 5,
            ngram_threshold: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSection {
    pub epoch: NaiveDate,
    /// Last day; defaults to the date of the latest scored tweet.
    pub end: Option<NaiveDate>,
    /// Demographic filters such as `party=Republican`; by default `all`
    /// plus one filter per value of every profile field.
    pub filters: Option<Vec<String>>,
}

impl Default for SeriesSection {
    fn default() -> Self {
        Self {
            epoch: maskshift::changepoint::DEFAULT_EPOCH,
            end: None,
            filters: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectSection {
    pub cost: String,
    /// Defaults to `2 ln N` per series.
    pub beta: Option<f64>,
    pub variance_floor: f64,
    pub min_segment_len: Option<usize>,
    pub window_days: u32,
    /// Segment degenerate series anyway.
    pub force: bool,
}

impl Default for DetectSection {
    fn default() -> Self {
        Self {
            cost: "NormalMeanVar".into(),
            beta: None,
            variance_floor: 1e-8,
            min_segment_len: None,
            window_days: 3,
            force: false,
        }
    }
}

impl PipelineConfig {
    /// Reads, resolves and validates the config. Every referenced path
    /// must exist.
    pub fn load(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        if let Some(o) = out {
            cfg.out = o;
        }
        if seed.is_some() {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.out);
        for (_, p) in self.paths.all_mut() {
            if let Some(p) = p {
                join(p);
            }
        }
        if let Some(h) = &mut self.hydrate {
            join(&mut h.ids);
            if let Some(f) = &mut h.fixture {
                join(f);
            }
        }
    }

    fn validate(&mut self) -> Result<()> {
        if self.seed.is_none() {
            return Err(CliError::Config("seed is required (config `seed` or --seed)".into()));
        }
        for (name, p) in self.paths.all_mut() {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(CliError::Config(format!(
                        "paths.{name}: {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        if let Some(h) = &self.hydrate {
            if !h.ids.exists() {
                return Err(CliError::Config(format!("hydrate.ids: {} does not exist", h.ids.display())));
            }
            match (h.backend.as_str(), &h.fixture) {
                ("fixture", Some(f)) if f.exists() => {}
                ("fixture", _) => {
                    return Err(CliError::Config("hydrate.fixture must name an existing file".into()))
                }
                ("http", _) => {}
                (other, _) => {
                    return Err(CliError::Config(format!("hydrate.backend {other:?} is not fixture or http")))
                }
            }
        }
        if !(0.0..=1.0).contains(&self.filter.org_threshold) {
            return Err(CliError::Config("filter.org_threshold must be in [0, 1]".into()));
        }
        if self.demographics.national_median == 0 {
            return Err(CliError::Config("demographics.national_median must be positive".into()));
        }
        if self.topics.candidates.is_empty() || self.topics.candidates.iter().any(|&k| k < 2) {
            return Err(CliError::Config("topics.candidates must be nonempty and each >= 2".into()));
        }
        self.detect
            .cost
            .parse::<maskshift::changepoint::CostKind>()
            .map_err(|e| CliError::Config(format!("detect.cost: {e}")))?;
        if self.detect.beta.is_some_and(|b| !(b > 0.0)) {
            return Err(CliError::Config("detect.beta must be positive".into()));
        }
        if let Some(fs) = &self.series.filters {
            for f in fs {
                f.parse::<maskshift::demographics::ProfileFilter>()
                    .map_err(|e| CliError::Config(format!("series.filters: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated")
    }

    /// SHA-256 over the resolved configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Per-stage seed: the first 8 bytes of SHA-256(seed || stage name).
    pub fn stage_seed(&self, stage: &str) -> u64 {
        let mut h = Sha256::new();
        h.update(self.seed().to_le_bytes());
        h.update(stage.as_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    }
}

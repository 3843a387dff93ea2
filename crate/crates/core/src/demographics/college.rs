//! College-student detection from user timelines: possessive attribute
//! ranking by PMI, TF-IDF features over the ranked phrases, a random forest,
//! and a keyword override.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::forest::{ForestParams, RandomForest};
use super::DemographicsError;

const CONTAINER_FORMAT: &str = "maskshift-college-model";
const CONTAINER_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributePattern {
    pub phrase: String,
    pub pmi: f64,
}

fn phrase_tokens(phrase: &str) -> Vec<String> {
    phrase.split_whitespace().map(str::to_lowercase).collect()
}

/// Occurrences of `phrase` as a contiguous run of `tokens`.
fn count_phrase(tokens: &[String], phrase: &[String]) -> usize {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return 0;
    }
    tokens.windows(phrase.len()).filter(|w| *w == phrase).count()
}

/// Ranks candidate phrases by how much more often college timelines contain
/// them: `log2(p(phrase | college) / p(phrase))`, both probabilities taken
/// over timelines with add-one smoothing. Sorted by PMI descending, then by
/// phrase.
pub fn rank_attributes(
    labeled_timelines: &[(Vec<String>, bool)],
    candidate_phrases: &[String],
) -> Result<Vec<AttributePattern>, DemographicsError> {
    let n_college = labeled_timelines.iter().filter(|(_, c)| *c).count();
    let n = labeled_timelines.len();
    if n_college == 0 || n_college == n {
        return Err(DemographicsError::Degenerate(
            "attribute ranking needs both college and non-college timelines".into(),
        ));
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for phrase in candidate_phrases {
        let toks = phrase_tokens(phrase);
        let key = toks.join(" ");
        if toks.is_empty() || !seen.insert(key.clone()) {
            continue;
        }
        let (mut in_college, mut in_all) = (0usize, 0usize);
        for (tl, is_college) in labeled_timelines {
            if count_phrase(tl, &toks) > 0 {
                in_all += 1;
                if *is_college {
                    in_college += 1;
                }
            }
        }
        let p_given = (in_college as f64 + 1.0) / (n_college as f64 + 2.0);
        let p = (in_all as f64 + 1.0) / (n as f64 + 2.0);
        out.push(AttributePattern {
            phrase: key,
            pmi: (p_given / p).log2(),
        });
    }
    out.sort_by(|a, b| b.pmi.total_cmp(&a.pmi).then_with(|| a.phrase.cmp(&b.phrase)));
    Ok(out)
}

/// Smoothed TF-IDF over a fixed vocabulary of (possibly multi-word) terms:
/// raw phrase counts times `ln((1 + N) / (1 + df)) + 1`, rows L2-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfVectorizer {
    vocabulary: Vec<String>,
    idf: Vec<f64>,
}

impl TfidfVectorizer {
    pub fn fit(timelines: &[Vec<String>], vocabulary: &[String]) -> Self {
        let n = timelines.len() as f64;
        let vocab: Vec<String> = vocabulary.iter().map(|t| phrase_tokens(t).join(" ")).collect();
        let idf = vocab
            .iter()
            .map(|term| {
                let toks = phrase_tokens(term);
                let df = timelines
                    .iter()
                    .filter(|tl| count_phrase(tl, &toks) > 0)
                    .count() as f64;
                ((1.0 + n) / (1.0 + df)).ln() + 1.0
            })
            .collect();
        Self {
            vocabulary: vocab,
            idf,
        }
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn transform(&self, timeline: &[String]) -> Vec<f64> {
        let mut row: Vec<f64> = self
            .vocabulary
            .iter()
            .zip(&self.idf)
            .map(|(term, idf)| count_phrase(timeline, &phrase_tokens(term)) as f64 * idf)
            .collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
        row
    }
}

/// Fits the vectorizer on `timelines` and returns the user × term matrix.
pub fn tfidf(timelines: &[Vec<String>], vocabulary: &[String]) -> Vec<Vec<f64>> {
    let v = TfidfVectorizer::fit(timelines, vocabulary);
    timelines.iter().map(|tl| v.transform(tl)).collect()
}

/// Forces a positive prediction when any of `terms` occurs at least
/// `min_count` times in one timeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideRule {
    pub terms: BTreeSet<String>,
    pub min_count: usize,
}

impl Default for OverrideRule {
    fn default() -> Self {
        Self {
            terms: ["professor", "textbook"].into_iter().map(String::from).collect(),
            min_count: 5,
        }
    }
}

impl OverrideRule {
    pub fn fires(&self, timeline: &[String]) -> bool {
        self.min_count > 0
            && self
                .terms
                .iter()
                .any(|t| count_phrase(timeline, &phrase_tokens(t)) >= self.min_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollegeClassifier {
    pub vectorizer: TfidfVectorizer,
    pub forest: RandomForest,
    pub override_rule: OverrideRule,
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    model: CollegeClassifier,
}

impl CollegeClassifier {
    /// Vectorizes `timelines` over `vocabulary` and trains the forest.
    pub fn train(
        timelines: &[Vec<String>],
        labels: &[bool],
        vocabulary: &[String],
        params: &ForestParams,
        override_rule: OverrideRule,
        seed: u64,
    ) -> Result<Self, DemographicsError> {
        if vocabulary.is_empty() {
            return Err(DemographicsError::Config("empty TF-IDF vocabulary".into()));
        }
        let vectorizer = TfidfVectorizer::fit(timelines, vocabulary);
        let x: Vec<Vec<f64>> = timelines.iter().map(|t| vectorizer.transform(t)).collect();
        let forest = RandomForest::fit(&x, labels, params, seed)?;
        Ok(Self {
            vectorizer,
            forest,
            override_rule,
        })
    }

    pub fn predict(&self, timeline: &[String]) -> bool {
        self.override_rule.fires(timeline) || self.forest.predict(&self.vectorizer.transform(timeline))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Container {
            format: CONTAINER_FORMAT.into(),
            version: CONTAINER_VERSION,
            model: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DemographicsError> {
        let c: Container =
            serde_json::from_str(text).map_err(|e| DemographicsError::Model(e.to_string()))?;
        if c.format != CONTAINER_FORMAT || c.version != CONTAINER_VERSION {
            return Err(DemographicsError::Model(format!(
                "unsupported container {} v{}",
                c.format, c.version
            )));
        }
        Ok(c.model)
    }

    pub fn save(&self, path: &Path) -> Result<(), DemographicsError> {
        std::fs::write(path, self.to_json()).map_err(|e| DemographicsError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, DemographicsError> {
        let text = std::fs::read_to_string(path).map_err(|e| DemographicsError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Trains the forest on precomputed features.
pub fn train_college(
    features: &[Vec<f64>],
    labels: &[bool],
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForest, DemographicsError> {
    RandomForest::fit(features, labels, params, seed)
}

/// Forest vote unless the override fires.
pub fn predict_college(
    model: &RandomForest,
    vectorizer: &TfidfVectorizer,
    timeline: &[String],
    override_rule: &OverrideRule,
) -> bool {
    override_rule.fires(timeline) || model.predict(&vectorizer.transform(timeline))
}

/// Count of each token over all timelines, useful for picking a vocabulary.
pub fn token_counts(timelines: &[Vec<String>]) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    for t in timelines.iter().flatten() {
        *out.entry(t.clone()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn phrase_counting() {
        let t = toks("my professor said my professor is late");
        assert_eq!(count_phrase(&t, &toks("my professor")), 2);
        assert_eq!(count_phrase(&t, &toks("professor")), 2);
        assert_eq!(count_phrase(&t, &toks("late again")), 0);
    }

    #[test]
    fn exclusive_phrase_ranks_first() {
        let data = vec![
            (toks("my professor rocks"), true),
            (toks("my professor again my dorm"), true),
            (toks("my boss again"), false),
            (toks("my dorm is noisy"), false),
        ];
        let cands: Vec<String> = ["my dorm", "my professor", "my boss", "again"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let ranked = rank_attributes(&data, &cands).unwrap();
        assert_eq!(ranked[0].phrase, "my professor");
        assert!(ranked[0].pmi > 0.0);
        let dorm = ranked.iter().find(|a| a.phrase == "my dorm").unwrap();
        assert!(dorm.pmi.abs() < 1e-12);
        assert_eq!(ranked.last().unwrap().phrase, "my boss");
    }

    #[test]
    fn single_class_ranking_is_degenerate() {
        let data = vec![(toks("a"), true), (toks("b"), true)];
        assert!(rank_attributes(&data, &["a".into()]).is_err());
    }

    #[test]
    fn tfidf_edge_cases() {
        let docs = vec![toks("a b"), toks("a c"), vec![]];
        let vocab: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let v = TfidfVectorizer::fit(&docs, &vocab);
        // df(a) = 2 of 3; df(b) = 1
        assert!((v.idf()[0] - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-12);
        assert!(v.idf()[0] < v.idf()[1]);
        let m = tfidf(&docs, &vocab);
        assert_eq!(m[2], vec![0.0, 0.0, 0.0]);
        for row in &m[..2] {
            let norm: f64 = row.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn term_in_every_doc_has_minimal_idf() {
        let docs = vec![toks("x a"), toks("x b"), toks("x")];
        let v = TfidfVectorizer::fit(&docs, &["x".into(), "a".into()]);
        assert_eq!(v.idf()[0], 1.0);
        assert!(v.idf()[0] < v.idf()[1]);
    }

    #[test]
    fn override_fires_at_threshold() {
        let rule = OverrideRule::default();
        assert!(rule.fires(&toks("professor ".repeat(5).trim())));
        assert!(!rule.fires(&toks("professor ".repeat(4).trim())));
        assert!(!rule.fires(&[]));
    }
}

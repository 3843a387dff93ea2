use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::{Document, TopicsError};
use crate::corpus::TweetRecord;

const BUNDLED_LEXICON: &str = include_str!("../../../../data/pos_lexicon.tsv");
const BUNDLED_STOPWORDS: &str = include_str!("../../../../data/stopwords_en.txt");
const BUNDLED_CUSTOM: &str = include_str!("../../../../data/custom_stopwords.txt");

/// Coarse part of speech.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl Pos {
    fn parse(tag: &str) -> Self {
        match tag.trim().to_ascii_uppercase().as_str() {
            "NOUN" | "PROPN" => Pos::Noun,
            "VERB" => Pos::Verb,
            "ADJ" => Pos::Adj,
            "ADV" => Pos::Adv,
            _ => Pos::Other,
        }
    }

    pub fn is_content(self) -> bool {
        self != Pos::Other
    }
}

/// Word to (lemma, POS) lookup. Unknown words are their own lemma and
/// count as nouns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PosLexicon {
    entries: HashMap<String, (String, Pos)>,
}

impl PosLexicon {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon parses")
    }

    /// Parses `word<TAB>lemma<TAB>pos` rows; a `word lemma pos` header line
    /// is skipped.
    pub fn parse(text: &str) -> Result<Self, TopicsError> {
        let mut entries = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || (idx == 0 && line.starts_with("word\t")) {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(TopicsError::Config(format!(
                    "POS lexicon line {}: expected word, lemma, pos",
                    idx + 1
                )));
            }
            entries.insert(
                cols[0].trim().to_lowercase(),
                (cols[1].trim().to_lowercase(), Pos::parse(cols[2])),
            );
        }
        Ok(Self { entries })
    }

    /// A missing file is a configuration error.
    pub fn load(path: &Path) -> Result<Self, TopicsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TopicsError::Config(format!("POS lexicon {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn lookup<'a>(&'a self, word: &'a str) -> (&'a str, Pos) {
        match self.entries.get(word) {
            Some((lemma, pos)) => (lemma, *pos),
            None => (word, Pos::Noun),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(pub HashSet<String>);

impl Stopwords {
    /// English list plus the virus-related custom list.
    pub fn bundled() -> Self {
        let mut s = Self::parse(BUNDLED_STOPWORDS);
        s.extend(&Self::parse(BUNDLED_CUSTOM));
        s
    }

    /// One token per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self, TopicsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TopicsError::Config(format!("stopwords {}: {e}", path.display())))?;
        Ok(Self::parse(&text))
    }

    pub fn extend(&mut self, other: &Stopwords) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }
}

/// Lemmatizes each record's tokens and keeps content-word lemmas that are
/// not stopwords (checked on both the token and its lemma). Tokens without
/// letters are dropped.
pub fn preprocess(
    records: &[TweetRecord],
    stopwords: &Stopwords,
    lexicon: &PosLexicon,
) -> Vec<Document> {
    records
        .iter()
        .map(|r| Document {
            source_id: r.id.clone(),
            lemmas: r
                .tokens
                .iter()
                .filter(|t| t.chars().any(char::is_alphabetic))
                .filter_map(|t| {
                    let t = t.to_lowercase();
                    let (lemma, pos) = lexicon.lookup(&t);
                    let keep = pos.is_content()
                        && !stopwords.contains(&t)
                        && !stopwords.contains(lemma);
                    keep.then(|| lemma.to_string())
                })
                .collect(),
        })
        .collect()
}

/// One left-to-right merging pass: an adjacent pair `(a, b)` becomes `a_b`
/// when it occurs at least `min_count` times and
/// `(count(a,b) - min_count) * V / (count(a) * count(b)) >= threshold`,
/// where `V` is the number of distinct tokens.
pub fn merge_pass(docs: &[Document], min_count: usize, threshold: f64) -> Vec<Document> {
    let mut uni: HashMap<&str, usize> = HashMap::new();
    let mut bi: HashMap<(&str, &str), usize> = HashMap::new();
    for d in docs {
        for t in &d.lemmas {
            *uni.entry(t).or_default() += 1;
        }
        for w in d.lemmas.windows(2) {
            *bi.entry((&w[0], &w[1])).or_default() += 1;
        }
    }
    let vocab = uni.len() as f64;
    let qualifies = |a: &str, b: &str| {
        let Some(&n_ab) = bi.get(&(a, b)) else {
            return false;
        };
        if n_ab < min_count.max(1) {
            return false;
        }
        let score = (n_ab - min_count) as f64 * vocab / (uni[a] * uni[b]) as f64;
        score >= threshold
    };
    docs.iter()
        .map(|d| {
            let t = &d.lemmas;
            let mut out = Vec::with_capacity(t.len());
            let mut i = 0;
            while i < t.len() {
                if i + 1 < t.len() && qualifies(&t[i], &t[i + 1]) {
                    out.push(format!("{}_{}", t[i], t[i + 1]));
                    i += 2;
                } else {
                    out.push(t[i].clone());
                    i += 1;
                }
            }
            Document {
                source_id: d.source_id.clone(),
                lemmas: out,
            }
        })
        .collect()
}

/// Bigram pass followed by a second pass that can extend bigrams to
/// trigrams.
pub fn merge_ngrams(docs: &[Document], min_count: usize, threshold: f64) -> Vec<Document> {
    let bigrams = merge_pass(docs, min_count, threshold);
    merge_pass(&bigrams, min_count, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Utc;

    fn record(id: &str, text: &str) -> TweetRecord {
        let c = crate::corpus::clean(text);
        TweetRecord {
            id: id.into(),
            created_at: Utc::now(),
            author_id: "a".into(),
            raw_text: text.into(),
            clean_text: c.clean_text,
            sentiment_text: c.sentiment_text,
            tokens: c.tokens,
            lang: "en".into(),
        }
    }

    fn doc(s: &str) -> Document {
        Document {
            source_id: String::new(),
            lemmas: s.split_whitespace().map(String::from).collect(),
        }
    }

    #[test]
    fn lemmatize_and_filter() {
        let mut sw = Stopwords::parse("are\n");
        sw.extend(&Stopwords::parse("covid19\n"));
        let docs = preprocess(
            &[record("1", "Masks are effective"), record("2", "covid19 zorblax")],
            &sw,
            &PosLexicon::bundled(),
        );
        assert_eq!(docs[0].lemmas, ["mask", "effective"]);
        assert_eq!(docs[1].lemmas, ["zorblax"]);
    }

    #[test]
    fn all_stopwords_gives_empty_document() {
        let docs = preprocess(
            &[record("1", "it is what it is")],
            &Stopwords::bundled(),
            &PosLexicon::bundled(),
        );
        assert!(docs[0].lemmas.is_empty());
    }

    #[test]
    fn missing_lexicon_is_config_error() {
        assert!(matches!(
            PosLexicon::load(Path::new("/nonexistent/pos.tsv")),
            Err(TopicsError::Config(_))
        ));
    }

    #[test]
    fn rare_pair_not_merged() {
        let docs = vec![doc("face mask"), doc("hand wash")];
        let merged = merge_ngrams(&docs, 5, 0.0);
        assert_eq!(merged, docs);
    }

    #[test]
    fn frequent_pair_merged_by_score() {
        // 10 docs "face mask wN": V = 12, count(face,mask) = 10
        // score = (10 - 2) * 12 / (10 * 10) = 0.96
        let docs: Vec<Document> = (0..10).map(|i| doc(&format!("face mask w{i}"))).collect();
        let merged = merge_pass(&docs, 2, 0.96);
        assert!(merged.iter().all(|d| d.lemmas[0] == "face_mask"));
        assert_eq!(merge_pass(&docs, 2, 0.97), docs);
    }
}

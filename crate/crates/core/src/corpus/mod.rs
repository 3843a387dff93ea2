//! Tweet ingestion: JSONL parsing, text cleaning, mask-term matching and
//! corpus filtering.

mod emoji;
pub mod hydrate;

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emoji::EmojiTable;
pub use hydrate::{hydrate, FixtureBackend, HttpBackend, Hydrated, HydrateError, HydrationClient, RetryPolicy};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: missing or invalid field {field:?}")]
    Field { line: usize, field: &'static str },
    #[error("line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("invalid dictionary entry {0:?}: entries must be lowercase and nonempty")]
    Dictionary(String),
}

/// One tweet plus the text variants derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub author_id: String,
    pub raw_text: String,
    pub clean_text: String,
    pub sentiment_text: String,
    pub tokens: Vec<String>,
    pub lang: String,
}

/// Output of [`clean`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cleaned {
    pub clean_text: String,
    pub sentiment_text: String,
    pub tokens: Vec<String>,
}

/// Text cleaner: URL, mention, hashtag and emoji stripping plus tokenization.
///
/// Removed spans are replaced by a space before whitespace is collapsed, so
/// removing one pattern can never splice two fragments into a new match.
#[derive(Debug, Clone)]
pub struct Cleaner {
    url: Regex,
    mention: Regex,
    hashtag: Regex,
    emoji: EmojiTable,
}

impl Cleaner {
    pub fn new(emoji: EmojiTable) -> Self {
        Self {
            url: Regex::new(r"(?i)\b(?:https?://|www\.)\S+").unwrap(),
            mention: Regex::new(r"@\w+").unwrap(),
            hashtag: Regex::new(r"#\w+").unwrap(),
            emoji,
        }
    }

    pub fn emoji_table(&self) -> &EmojiTable {
        &self.emoji
    }

    pub fn clean(&self, raw_text: &str) -> Cleaned {
        let no_links = self.url.replace_all(raw_text, " ");
        let no_mentions = self.mention.replace_all(&no_links, " ");
        let sentiment_text = collapse_whitespace(&no_mentions);

        let no_tags = self.hashtag.replace_all(&no_mentions, " ");
        let no_emoji: String = no_tags
            .chars()
            .map(|c| if self.emoji.contains(c) { ' ' } else { c })
            .collect();
        let clean_text = collapse_whitespace(&no_emoji);
        let tokens = tokenize(&clean_text);
        Cleaned {
            clean_text,
            sentiment_text,
            tokens,
        }
    }
}

impl Default for Cleaner {
    fn default() -> Self {
        Self::new(EmojiTable::bundled())
    }
}

fn default_cleaner() -> &'static Cleaner {
    static CLEANER: OnceLock<Cleaner> = OnceLock::new();
    CLEANER.get_or_init(Cleaner::default)
}

/// Cleans `raw_text` with the bundled emoji table.
pub fn clean(raw_text: &str) -> Cleaned {
    default_cleaner().clean(raw_text)
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercase runs of alphanumerics and apostrophes. Runs made only of
/// apostrophes are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(|t| t.replace('\u{2019}', "'").to_lowercase())
        .collect()
}

#[derive(Deserialize)]
struct RawLine {
    id: Option<serde_json::Value>,
    created_at: Option<String>,
    author_id: Option<serde_json::Value>,
    full_text: Option<String>,
    lang: Option<String>,
}

fn id_string(v: Option<serde_json::Value>) -> Option<String> {
    match v? {
        serde_json::Value::String(s) if !s.is_empty() => Some(s),
        _ => None,
    }
}

/// Parses one JSONL line (`line_no` is 1-based and only used in errors).
pub fn parse_record(line: &[u8], line_no: usize) -> Result<TweetRecord, CorpusError> {
    parse_record_with(line, line_no, default_cleaner())
}

pub fn parse_record_with(
    line: &[u8],
    line_no: usize,
    cleaner: &Cleaner,
) -> Result<TweetRecord, CorpusError> {
    let raw: RawLine = serde_json::from_slice(line).map_err(|e| CorpusError::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    let field = |field| CorpusError::Field {
        line: line_no,
        field,
    };
    let id = id_string(raw.id).ok_or_else(|| field("id"))?;
    let created_at = raw
        .created_at
        .as_deref()
        .and_then(|s| DateTime::parse_from_rfc3339(s).ok())
        .map(|t| t.with_timezone(&Utc))
        .ok_or_else(|| field("created_at"))?;
    let author_id = id_string(raw.author_id).ok_or_else(|| field("author_id"))?;
    let raw_text = raw.full_text.ok_or_else(|| field("full_text"))?;
    let lang = raw.lang.ok_or_else(|| field("lang"))?;
    let Cleaned {
        clean_text,
        sentiment_text,
        tokens,
    } = cleaner.clean(&raw_text);
    Ok(TweetRecord {
        id,
        created_at,
        author_id,
        raw_text,
        clean_text,
        sentiment_text,
        tokens,
        lang,
    })
}

/// Serializes a record back to the input JSONL schema.
pub fn to_jsonl(record: &TweetRecord) -> String {
    serde_json::json!({
        "id": record.id,
        "created_at": record.created_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "author_id": record.author_id,
        "full_text": record.raw_text,
        "lang": record.lang,
    })
    .to_string()
}

/// Reads every record of a JSONL file, failing on the first bad line.
/// Blank lines are skipped but still counted for line numbers.
pub fn read_jsonl(path: &Path) -> Result<Vec<TweetRecord>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io)?;
    let cleaner = default_cleaner();
    let mut out = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_record_with(line.as_bytes(), idx + 1, cleaner)?);
    }
    Ok(out)
}

/// Mask-related phrases and hashtags.
#[derive(Debug, Clone)]
pub struct TermDictionary {
    terms: BTreeSet<String>,
    hashtags: BTreeSet<String>,
    phrase_re: Option<Regex>,
}

impl TermDictionary {
    /// Entries starting with `#` are hashtags, everything else a phrase.
    pub fn new<I, S>(entries: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut terms = BTreeSet::new();
        let mut hashtags = BTreeSet::new();
        for entry in entries {
            let e = entry.as_ref().trim();
            if e.is_empty() || e == "#" || e.to_lowercase() != e {
                return Err(CorpusError::Dictionary(e.to_string()));
            }
            if e.starts_with('#') {
                hashtags.insert(e.to_string());
            } else {
                terms.insert(e.split_whitespace().collect::<Vec<_>>().join(" "));
            }
        }
        let phrase_re = if terms.is_empty() {
            None
        } else {
            let alts: Vec<String> = terms
                .iter()
                .map(|t| {
                    t.split(' ')
                        .map(regex::escape)
                        .collect::<Vec<_>>()
                        .join(r"\s+")
                })
                .collect();
            let pattern = format!(r"\b(?:{})(?:s|es)?\b", alts.join("|"));
            Some(Regex::new(&pattern).expect("escaped alternation compiles"))
        };
        Ok(Self {
            terms,
            hashtags,
            phrase_re,
        })
    }

    /// Reads the plain-text dictionary format. Lines beginning with `# `
    /// (hash, space) are comments.
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("# ") && *l != "#"),
        )
    }

    pub fn terms(&self) -> &BTreeSet<String> {
        &self.terms
    }

    pub fn hashtags(&self) -> &BTreeSet<String> {
        &self.hashtags
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.hashtags.is_empty()
    }

    /// Whether lowercased `raw_text` mentions any term or hashtag.
    pub fn matches_text(&self, raw_text: &str) -> bool {
        static HASHTAG: OnceLock<Regex> = OnceLock::new();
        let lower = raw_text.to_lowercase();
        if let Some(re) = &self.phrase_re {
            if re.is_match(&lower) {
                return true;
            }
        }
        if self.hashtags.is_empty() {
            return false;
        }
        HASHTAG
            .get_or_init(|| Regex::new(r"#\w+").unwrap())
            .find_iter(&lower)
            .any(|m| self.hashtags.contains(m.as_str()))
    }
}

pub fn matches_topic(record: &TweetRecord, dict: &TermDictionary) -> bool {
    dict.matches_text(&record.raw_text)
}

/// Filtering tallies. `read` always equals `kept` plus every drop counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub read: u64,
    pub kept: u64,
    pub dropped_language: u64,
    pub dropped_no_match: u64,
    pub dropped_deleted: u64,
    pub dropped_org: u64,
}

impl CorpusStats {
    pub fn dropped(&self) -> u64 {
        self.dropped_language + self.dropped_no_match + self.dropped_deleted + self.dropped_org
    }

    pub fn is_conserved(&self) -> bool {
        self.read == self.kept + self.dropped()
    }
}

/// An input slot for [`filter_corpus`]: either a record or an id that could
/// not be hydrated.
#[derive(Debug, Clone)]
pub enum Slot {
    Present(TweetRecord),
    Deleted(String),
}

impl From<TweetRecord> for Slot {
    fn from(r: TweetRecord) -> Self {
        Slot::Present(r)
    }
}

/// Configuration for [`filter_corpus`].
#[derive(Debug, Clone, Copy)]
pub struct FilterOptions<'a> {
    pub lang: &'a str,
    pub org_scores: &'a HashMap<String, f64>,
    pub org_threshold: f64,
}

fn lang_matches(tag: &str, wanted: &str) -> bool {
    let tag = tag.to_ascii_lowercase();
    let wanted = wanted.to_ascii_lowercase();
    tag == wanted || tag.strip_prefix(&wanted).is_some_and(|rest| rest.starts_with('-'))
}

/// Keeps records in `lang` that match `dict` and whose author is below the
/// organization threshold. Checks run in that order; each dropped record is
/// counted under the first check it fails. Order is preserved.
pub fn filter_corpus<I, T>(
    input: I,
    dict: &TermDictionary,
    opts: FilterOptions<'_>,
) -> (Vec<TweetRecord>, CorpusStats)
where
    I: IntoIterator<Item = T>,
    T: Into<Slot>,
{
    let mut stats = CorpusStats::default();
    let mut kept = Vec::new();
    for slot in input {
        stats.read += 1;
        let record = match slot.into() {
            Slot::Present(r) => r,
            Slot::Deleted(_) => {
                stats.dropped_deleted += 1;
                continue;
            }
        };
        if !lang_matches(&record.lang, opts.lang) {
            stats.dropped_language += 1;
        } else if !matches_topic(&record, dict) {
            stats.dropped_no_match += 1;
        } else if opts
            .org_scores
            .get(&record.author_id)
            .is_some_and(|&p| p >= opts.org_threshold)
        {
            stats.dropped_org += 1;
        } else {
            stats.kept += 1;
            kept.push(record);
        }
    }
    (kept, stats)
}

/// Reads `author_id,org_probability` rows.
pub fn load_org_scores(path: &Path) -> Result<HashMap<String, f64>, CorpusError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    let mut out = HashMap::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| CorpusError::Table {
            line,
            message: e.to_string(),
        })?;
        let author = row.get(0).unwrap_or("").trim();
        let prob: f64 = row
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .filter(|p: &f64| (0.0..=1.0).contains(p))
            .ok_or_else(|| CorpusError::Table {
                line,
                message: "org_probability must be a number in [0, 1]".into(),
            })?;
        if author.is_empty() {
            return Err(CorpusError::Table {
                line,
                message: "empty author_id".into(),
            });
        }
        out.insert(author.to_string(), prob);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(id: &str, author: &str, text: &str, lang: &str) -> TweetRecord {
        let line = serde_json::json!({
            "id": id, "created_at": "2020-04-03T12:00:00Z", "author_id": author,
            "full_text": text, "lang": lang,
        })
        .to_string();
        parse_record(line.as_bytes(), 1).unwrap()
    }

    fn dict() -> TermDictionary {
        TermDictionary::new(["mask", "face mask", "#facemask"]).unwrap()
    }

    #[test]
    fn clean_strips_trailing_url() {
        let r = record("1", "a", "Wear a mask! https://t.co/x", "en");
        assert_eq!(r.clean_text, "Wear a mask!");
        assert_eq!(r.sentiment_text, "Wear a mask!");
        assert_eq!(r.tokens, ["wear", "a", "mask"]);
    }

    #[test]
    fn clean_keeps_hashtags_and_emoji_for_sentiment() {
        let c = clean("STOP BUYING MASKS! #covid 😷");
        assert_eq!(c.clean_text, "STOP BUYING MASKS!");
        assert_eq!(c.sentiment_text, "STOP BUYING MASKS! #covid 😷");
    }

    #[test]
    fn clean_empty() {
        assert_eq!(clean(""), Cleaned::default());
    }

    #[test]
    fn clean_drops_mentions() {
        let c = clean("@cdc masks work https://a.b");
        assert_eq!(c.clean_text, "masks work");
        assert_eq!(c.sentiment_text, "masks work");
        assert_eq!(c.tokens, ["masks", "work"]);
    }

    #[test]
    fn tokenizer_keeps_apostrophes() {
        assert_eq!(tokenize("Don't   STOP-now ''"), ["don't", "stop", "now"]);
    }

    #[test]
    fn missing_id_is_a_field_error() {
        let line = br#"{"created_at":"2020-01-27T00:00:00Z","author_id":"u","full_text":"x","lang":"en"}"#;
        match parse_record(line, 7) {
            Err(CorpusError::Field { line: 7, field: "id" }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        assert!(matches!(
            parse_record(b"{not json", 12),
            Err(CorpusError::Parse { line: 12, .. })
        ));
    }

    #[test]
    fn unknown_keys_are_ignored() {
        let line = br#"{"id":"9","created_at":"2020-01-27T00:00:00+00:00","author_id":"u","full_text":"x","lang":"en","retweet_count":4}"#;
        assert_eq!(parse_record(line, 1).unwrap().id, "9");
    }

    #[test]
    fn term_matching_handles_plurals_and_boundaries() {
        let d = dict();
        assert!(d.matches_text("I hate face masks"));
        assert!(d.matches_text("MASKS everywhere"));
        assert!(d.matches_text("no masks, no boxes"));
        assert!(!d.matches_text("bitmask operations in code"));
        assert!(!d.matches_text("masking tape"));
        assert!(d.matches_text("#FaceMask required"));
        assert!(!d.matches_text("#FaceMasks2020 required"));
    }

    #[test]
    fn dictionary_rejects_uppercase_and_empty() {
        assert!(TermDictionary::new(["Mask"]).is_err());
        assert!(TermDictionary::new([" "]).is_err());
    }

    #[test]
    fn dictionary_parse_skips_comments() {
        let d = TermDictionary::parse("# comment line\nmask\n\n#maskup\n").unwrap();
        assert_eq!(d.terms().len(), 1);
        assert!(d.hashtags().contains("#maskup"));
    }

    #[test]
    fn filter_ten_record_stream() {
        let texts = [
            ("1", "a", "wear a mask"),
            ("2", "b", "nice weather"),
            ("3", "org", "free face masks at our store"),
            ("4", "c", "lunch time"),
            ("5", "d", "#facemask on"),
            ("6", "e", "bitmask"),
            ("7", "f", "masks work"),
            ("8", "g", "hello"),
            ("9", "h", "good morning"),
            ("10", "i", "stay home"),
        ];
        let recs: Vec<_> = texts.iter().map(|(i, a, t)| record(i, a, t, "en")).collect();
        let orgs = HashMap::from([("org".to_string(), 0.9), ("a".to_string(), 0.1)]);
        let opts = FilterOptions {
            lang: "en",
            org_scores: &orgs,
            org_threshold: 0.5,
        };
        let (kept, stats) = filter_corpus(recs, &dict(), opts);
        let ids: Vec<_> = kept.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["1", "5", "7"]);
        assert_eq!(
            stats,
            CorpusStats {
                read: 10,
                kept: 3,
                dropped_no_match: 6,
                dropped_org: 1,
                ..Default::default()
            }
        );
    }

    #[test]
    fn filter_empty_stream() {
        let orgs = HashMap::new();
        let opts = FilterOptions {
            lang: "en",
            org_scores: &orgs,
            org_threshold: 0.5,
        };
        let (kept, stats) = filter_corpus(Vec::<TweetRecord>::new(), &dict(), opts);
        assert!(kept.is_empty());
        assert_eq!(stats, CorpusStats::default());
    }

    #[test]
    fn filter_counts_language_and_deleted() {
        let orgs = HashMap::new();
        let opts = FilterOptions {
            lang: "en",
            org_scores: &orgs,
            org_threshold: 0.0,
        };
        let slots = vec![
            Slot::Present(record("1", "a", "mask", "en-GB")),
            Slot::Present(record("2", "a", "mask", "es")),
            Slot::Deleted("3".into()),
        ];
        let (kept, stats) = filter_corpus(slots, &dict(), opts);
        assert_eq!(kept.len(), 1);
        assert_eq!(stats.dropped_language, 1);
        assert_eq!(stats.dropped_deleted, 1);
        // threshold 0.0 with no scores still drops nobody
        assert_eq!(stats.dropped_org, 0);
        assert!(stats.is_conserved());
    }

    #[test]
    fn jsonl_round_trip_preserves_fields() {
        let r = record("42", "u", "Masks 😷 @x https://y.z", "en");
        let again = parse_record(to_jsonl(&r).as_bytes(), 1).unwrap();
        assert_eq!(again, r);
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(s in "[a-zA-Z#@:/. !'😷🦠é0-9]{0,40}") {
            let first = clean(&s);
            let second = clean(&first.clean_text);
            prop_assert_eq!(&second.clean_text, &first.clean_text);
            prop_assert_eq!(&second.sentiment_text, &first.clean_text);
            prop_assert_eq!(&second.tokens, &first.tokens);
        }

        #[test]
        fn clean_text_has_no_stripped_patterns(s in "[a-z#@:/. 😷0-9]{0,40}") {
            let c = clean(&s);
            let cleaner = Cleaner::default();
            prop_assert!(!cleaner.url.is_match(&c.clean_text));
            prop_assert!(!cleaner.mention.is_match(&c.clean_text));
            prop_assert!(!cleaner.hashtag.is_match(&c.clean_text));
            prop_assert!(!c.clean_text.chars().any(|ch| cleaner.emoji.contains(ch)));
            prop_assert_eq!(tokenize(&c.clean_text), c.tokens.clone());
            prop_assert!(c.tokens.iter().all(|t| !t.is_empty()));
        }

        #[test]
        fn filter_conserves_counts(texts in proptest::collection::vec("(mask|hello|#facemask|x)( y)?", 0..30),
                                   probs in proptest::collection::vec(0.0f64..1.0, 30)) {
            let recs: Vec<_> = texts.iter().enumerate()
                .map(|(i, t)| record(&i.to_string(), &format!("u{}", i % 5), t, if i % 7 == 0 { "fr" } else { "en" }))
                .collect();
            let orgs: HashMap<_, _> = (0..5).map(|i| (format!("u{i}"), probs[i])).collect();
            let opts = FilterOptions { lang: "en", org_scores: &orgs, org_threshold: 0.5 };
            let d = dict();
            let (kept, stats) = filter_corpus(recs.clone(), &d, opts);
            prop_assert!(stats.is_conserved());
            prop_assert_eq!(stats.read as usize, recs.len());
            prop_assert!(kept.iter().all(|r| matches_topic(r, &d)));
            let (again, stats2) = filter_corpus(recs, &d, opts);
            prop_assert_eq!(again, kept);
            prop_assert_eq!(stats2, stats);
        }
    }
}

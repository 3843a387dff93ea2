//! Lexicon-and-rules valence scoring for short social-media text.
//!
//! Each lexicon hit contributes its mean valence, adjusted by preceding
//! booster words, preceding negators and emphatic capitalization. The
//! adjusted sum `s` is mapped into `(-1, 1)` by `s / sqrt(s² + alpha)`.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EmojiTable;

const BUNDLED_LEXICON: &str = include_str!("../../../../data/valence_lexicon.tsv");
const BUNDLED_EMOJI: &str = include_str!("../../../../data/emoji_valence.tsv");

/// Exclamation marks past this count add nothing.
const MAX_EXCLAMATIONS: usize = 3;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("cannot average an empty set of scores")]
    EmptyAggregate,
    #[error("compound score {0} is outside [-1, 1]")]
    OutOfRange(f64),
    #[error("invalid rule setting {key}: {message}")]
    Rule { key: String, message: String },
}

/// Token and emoji valences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    pub entries: HashMap<String, f64>,
    pub emoji_entries: HashMap<String, f64>,
}

fn parse_rows(text: &str, lowercase: bool) -> Result<HashMap<String, f64>, SentimentError> {
    let mut out = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let row = |message: String| SentimentError::Row {
            line: idx + 1,
            message,
        };
        let mut cols = raw.split('\t');
        let key = cols.next().unwrap_or("").trim();
        let value = cols
            .next()
            .ok_or_else(|| row("expected token<TAB>valence".into()))?
            .trim();
        if key.is_empty() {
            return Err(row("empty token".into()));
        }
        let value: f64 = value
            .parse()
            .map_err(|_| row(format!("valence {value:?} is not a number")))?;
        if !value.is_finite() {
            return Err(row(format!("valence {value} is not finite")));
        }
        let key = if lowercase {
            key.to_lowercase()
        } else {
            key.to_string()
        };
        out.insert(key, value);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, SentimentError> {
    std::fs::read_to_string(path).map_err(|source| SentimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl Lexicon {
    /// The bundled word lexicon plus the derived emoji valences.
    pub fn bundled() -> Self {
        Self {
            entries: parse_rows(BUNDLED_LEXICON, true).expect("bundled lexicon parses"),
            emoji_entries: parse_rows(BUNDLED_EMOJI, false).expect("bundled emoji lexicon parses"),
        }
    }

    /// Parses TSV `token<TAB>valence[<TAB>...]`; later duplicates win.
    pub fn parse(text: &str) -> Result<Self, SentimentError> {
        Ok(Self {
            entries: parse_rows(text, true)?,
            emoji_entries: HashMap::new(),
        })
    }

    pub fn with_emoji(mut self, text: &str) -> Result<Self, SentimentError> {
        self.emoji_entries = parse_rows(text, false)?;
        Ok(self)
    }

    pub fn load_emoji(self, path: &Path) -> Result<Self, SentimentError> {
        self.with_emoji(&read(path)?)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.emoji_entries.is_empty()
    }
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, SentimentError> {
    Lexicon::parse(&read(path)?)
}

/// Scoring constants. Defaults follow the usual conventions of
/// lexicon-and-rules social-media scorers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub boosters: HashMap<String, f64>,
    pub negators: HashSet<String>,
    pub negation_window: usize,
    pub caps_boost: f64,
    pub exclamation_increment: f64,
    pub negation_factor: f64,
    pub alpha: f64,
}

const INCR: f64 = 0.293;

const UP_BOOSTERS: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very",
];

const DOWN_BOOSTERS: &[&str] = &[
    "almost", "barely", "hardly", "kinda", "kindof", "kind-of", "less", "little", "marginal",
    "marginally", "occasional", "occasionally", "partly", "scarce", "scarcely", "slight",
    "slightly", "somewhat", "sorta", "sortof", "sort-of",
];

const NEGATORS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

impl Default for RuleSet {
    fn default() -> Self {
        let boosters = UP_BOOSTERS
            .iter()
            .map(|w| (w.to_string(), INCR))
            .chain(DOWN_BOOSTERS.iter().map(|w| (w.to_string(), -INCR)))
            .collect();
        Self {
            boosters,
            negators: NEGATORS.iter().map(|w| w.to_string()).collect(),
            negation_window: 3,
            caps_boost: 0.733,
            exclamation_increment: 0.292,
            negation_factor: -0.74,
            alpha: 15.0,
        }
    }
}

impl RuleSet {
    pub fn validate(&self) -> Result<(), SentimentError> {
        let bad = |key: &str, message: &str| {
            Err(SentimentError::Rule {
                key: key.into(),
                message: message.into(),
            })
        };
        if self.negation_window < 1 {
            return bad("negation_window", "must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be positive");
        }
        if !(self.negation_factor > -1.0 && self.negation_factor < 0.0) {
            return bad("negation_factor", "must lie in (-1, 0)");
        }
        for (key, v) in [
            ("caps_boost", self.caps_boost),
            ("exclamation_increment", self.exclamation_increment),
        ] {
            if !v.is_finite() {
                return bad(key, "must be finite");
            }
        }
        Ok(())
    }

    /// Applies `key = value` overrides for the scalar settings.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), SentimentError> {
        let num = || {
            value.trim().parse::<f64>().map_err(|_| SentimentError::Rule {
                key: key.into(),
                message: format!("{value:?} is not a number"),
            })
        };
        match key {
            "negation_window" => {
                self.negation_window = value.trim().parse().map_err(|_| SentimentError::Rule {
                    key: key.into(),
                    message: format!("{value:?} is not a count"),
                })?
            }
            "caps_boost" => self.caps_boost = num()?,
            "exclamation_increment" => self.exclamation_increment = num()?,
            "negation_factor" => self.negation_factor = num()?,
            "alpha" => self.alpha = num()?,
            _ => {
                return Err(SentimentError::Rule {
                    key: key.into(),
                    message: "unknown setting".into(),
                })
            }
        }
        self.validate()
    }

    fn is_negator(&self, lower: &str) -> bool {
        self.negators.contains(lower) || lower.ends_with("n't")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub compound: f64,
    pub pos: f64,
    pub neu: f64,
    pub neg: f64,
}

impl SentimentScore {
    pub fn neutral() -> Self {
        Self {
            compound: 0.0,
            pos: 0.0,
            neu: 1.0,
            neg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
        }
    }
}

/// Any nonzero compound counts, so 0.04 is positive.
pub fn polarity(compound: f64) -> Result<Polarity, SentimentError> {
    if !(-1.0..=1.0).contains(&compound) {
        return Err(SentimentError::OutOfRange(compound));
    }
    Ok(if compound > 0.0 {
        Polarity::Positive
    } else if compound < 0.0 {
        Polarity::Negative
    } else {
        Polarity::Neutral
    })
}

pub fn mean_compound(scores: &[SentimentScore]) -> Result<f64, SentimentError> {
    if scores.is_empty() {
        return Err(SentimentError::EmptyAggregate);
    }
    Ok(scores.iter().map(|s| s.compound).sum::<f64>() / scores.len() as f64)
}

/// `s / sqrt(s² + alpha)`.
pub fn normalize(sum: f64, alpha: f64) -> f64 {
    let c = sum / (sum * sum + alpha).sqrt();
    c.clamp(-1.0, 1.0)
}

#[derive(Debug)]
enum Item<'a> {
    Word { text: &'a str, lower: String },
    Emoji(char),
}

fn is_all_caps(word: &str) -> bool {
    word.chars().any(char::is_alphabetic) && !word.chars().any(char::is_lowercase)
}

// Skin-tone modifiers, variation selectors and joiners carry no meaning alone.
fn is_emoji_modifier(c: char) -> bool {
    matches!(c as u32, 0xFE00..=0xFE0F | 0x200D | 0x1F3FB..=0x1F3FF | 0x20E3)
}

fn split_items<'a>(text: &'a str, emoji: &EmojiTable) -> Vec<Item<'a>> {
    let mut items = Vec::new();
    for chunk in text.split_whitespace() {
        let mut start = None;
        let flush = |items: &mut Vec<Item<'a>>, s: usize, e: usize| {
            let piece = chunk[s..e]
                .trim_matches(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
                .trim_matches(|c: char| c == '\'' || c == '-');
            if piece.chars().any(char::is_alphanumeric) {
                items.push(Item::Word {
                    text: piece,
                    lower: piece.to_lowercase(),
                });
            }
        };
        for (i, c) in chunk.char_indices() {
            if emoji.contains(c) {
                if let Some(s) = start.take() {
                    flush(&mut items, s, i);
                }
                if !is_emoji_modifier(c) {
                    items.push(Item::Emoji(c));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            flush(&mut items, s, chunk.len());
        }
    }
    items
}

/// Valence scorer over a lexicon, a rule set and an emoji table.
#[derive(Debug, Clone)]
pub struct Scorer {
    pub lexicon: Lexicon,
    pub rules: RuleSet,
    emoji: EmojiTable,
}

impl Scorer {
    pub fn new(lexicon: Lexicon, rules: RuleSet) -> Self {
        Self::with_emoji_table(lexicon, rules, EmojiTable::bundled())
    }

    pub fn with_emoji_table(lexicon: Lexicon, rules: RuleSet, emoji: EmojiTable) -> Self {
        Self {
            lexicon,
            rules,
            emoji,
        }
    }

    pub fn score(&self, text: &str) -> SentimentScore {
        let rules = &self.rules;
        let items = split_items(text, &self.emoji);
        let words: Vec<&str> = items
            .iter()
            .filter_map(|it| match it {
                Item::Word { text, .. } => Some(*text),
                Item::Emoji(_) => None,
            })
            .collect();
        let n_caps = words.iter().filter(|w| is_all_caps(w)).count();
        let cap_differential = n_caps > 0 && n_caps < words.len();

        let lookup = |lower: &str| -> Option<f64> {
            let key = lower.strip_prefix('#').unwrap_or(lower);
            self.lexicon.entries.get(key).copied()
        };

        let mut contributions = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let (text, lower) = match item {
                Item::Emoji(c) => {
                    let mut buf = [0u8; 4];
                    let key: &str = c.encode_utf8(&mut buf);
                    contributions.push(self.lexicon.emoji_entries.get(key).copied().unwrap_or(0.0));
                    continue;
                }
                Item::Word { text, lower } => (*text, lower.as_str()),
            };
            let Some(base) = lookup(lower).filter(|_| !rules.boosters.contains_key(lower)) else {
                contributions.push(0.0);
                continue;
            };
            let sign = if base < 0.0 { -1.0 } else { 1.0 };
            let mut v = base;
            if cap_differential && is_all_caps(text) {
                v += sign * rules.caps_boost;
            }
            let window = items[i.saturating_sub(rules.negation_window)..i].iter().rev();
            let mut negations = 0;
            for prev in window.clone() {
                let Item::Word { text: ptext, lower: plower } = prev else {
                    continue;
                };
                if let Some(&incr) = rules.boosters.get(plower.as_str()) {
                    if lookup(plower).is_none() {
                        let mut scalar = incr * sign;
                        if cap_differential && is_all_caps(ptext) {
                            scalar += rules.caps_boost * scalar.signum();
                        }
                        v += scalar;
                    }
                }
                if rules.is_negator(plower) {
                    negations += 1;
                }
            }
            for _ in 0..negations {
                v *= rules.negation_factor;
            }
            contributions.push(v);
        }

        let mut sum: f64 = contributions.iter().sum();
        let bangs = text.chars().filter(|&c| c == '!').count().min(MAX_EXCLAMATIONS);
        let emphasis = bangs as f64 * rules.exclamation_increment;
        if sum > 0.0 {
            sum += emphasis;
        } else if sum < 0.0 {
            sum -= emphasis;
        }
        let compound = if sum == 0.0 {
            0.0
        } else {
            normalize(sum, rules.alpha)
        };

        let (mut pos, mut neg, mut neu) = (0.0, 0.0, 0.0);
        for &v in &contributions {
            if v > 0.0 {
                pos += v + 1.0;
            } else if v < 0.0 {
                neg += v - 1.0;
            } else {
                neu += 1.0;
            }
        }
        if pos > neg.abs() {
            pos += emphasis;
        } else if pos < neg.abs() {
            neg -= emphasis;
        }
        let total = pos + neg.abs() + neu;
        if total == 0.0 {
            return SentimentScore::neutral();
        }
        SentimentScore {
            compound,
            pos: pos / total,
            neu: neu / total,
            neg: neg.abs() / total,
        }
    }
}

pub fn score(text: &str, lexicon: &Lexicon, rules: &RuleSet) -> SentimentScore {
    Scorer::new(lexicon.clone(), rules.clone()).score(text)
}

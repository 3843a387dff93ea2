//! Party affiliation from followed candidate accounts, gated on political
//! talk in the user's own tweets.

use std::collections::BTreeSet;
use std::path::Path;

use super::{DemographicsError, Party};

const BUNDLED_KEYWORDS: &str = include_str!("../../../../data/political_keywords.txt");

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartyDirectory {
    pub democrat_ids: BTreeSet<String>,
    pub republican_ids: BTreeSet<String>,
    /// Lowercase keywords; multi-word entries match as contiguous tokens.
    pub political_keywords: BTreeSet<String>,
}

impl PartyDirectory {
    /// `accounts` is `account_id,party` CSV; `keywords` is one term per line
    /// (`#` comments allowed).
    pub fn parse(accounts: &str, keywords: &str) -> Result<Self, DemographicsError> {
        let mut dir = Self::default();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(accounts.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| DemographicsError::Row {
                what: "party directory",
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        if header.iter().collect::<Vec<_>>() != ["account_id", "party"] {
            return Err(DemographicsError::Header {
                what: "party directory",
                expected: "account_id,party".into(),
                found: header.iter().collect::<Vec<_>>().join(","),
            });
        }
        for (idx, row) in reader.records().enumerate() {
            let row_err = |message: String| DemographicsError::Row {
                what: "party directory",
                line: idx + 2,
                message,
            };
            let row = row.map_err(|e| row_err(e.to_string()))?;
            let party: Party = row[1].parse().map_err(row_err)?;
            let id = row[0].to_string();
            match party {
                Party::Democrat => dir.democrat_ids.insert(id),
                Party::Republican => dir.republican_ids.insert(id),
            };
        }
        dir.political_keywords = keywords
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase())
            .collect();
        Ok(dir)
    }

    /// Reads the accounts CSV; without a keyword file the bundled list is
    /// used.
    pub fn load(accounts: &Path, keywords: Option<&Path>) -> Result<Self, DemographicsError> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| DemographicsError::io(p, e));
        let kw = match keywords {
            Some(p) => read(p)?,
            None => BUNDLED_KEYWORDS.to_string(),
        };
        Self::parse(&read(accounts)?, &kw)
    }

    pub fn bundled_keywords() -> BTreeSet<String> {
        Self::parse("account_id,party\n", BUNDLED_KEYWORDS)
            .expect("bundled keywords parse")
            .political_keywords
    }

    /// Whether any tweet mentions a political keyword.
    pub fn has_keyword(&self, tweets: &[Vec<String>]) -> bool {
        let phrases: Vec<Vec<&str>> = self
            .political_keywords
            .iter()
            .map(|k| k.split(' ').collect())
            .collect();
        tweets.iter().any(|tokens| {
            phrases.iter().any(|p| {
                tokens
                    .windows(p.len())
                    .any(|w| w.iter().zip(p).all(|(t, k)| t.eq_ignore_ascii_case(k)))
            })
        })
    }
}

/// The party whose candidates the user follows, if the user talks politics
/// and follows candidates of exactly one party.
pub fn infer_party(
    tweets: &[Vec<String>],
    following: &[String],
    dir: &PartyDirectory,
) -> Option<Party> {
    if !dir.has_keyword(tweets) {
        return None;
    }
    let dem = following.iter().any(|id| dir.democrat_ids.contains(id));
    let rep = following.iter().any(|id| dir.republican_ids.contains(id));
    match (dem, rep) {
        (true, false) => Some(Party::Democrat),
        (false, true) => Some(Party::Republican),
        _ => None,
    }
}

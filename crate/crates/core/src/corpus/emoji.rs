//! Codepoint-range table deciding which characters count as emoji.

use std::path::Path;

use super::CorpusError;

const BUNDLED: &str = include_str!("../../../../data/emoji_ranges.csv");

/// Sorted, merged inclusive codepoint ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmojiTable {
    ranges: Vec<(u32, u32)>,
}

impl EmojiTable {
    /// The table shipped in `data/emoji_ranges.csv`.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled emoji table is well formed")
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses `start_hex,end_hex` rows. A header row is optional.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut ranges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || (idx == 0 && line.starts_with("start")) {
                continue;
            }
            let bad = || CorpusError::Table {
                line: idx + 1,
                message: format!("expected start_hex,end_hex, got {line:?}"),
            };
            let (start, end) = line.split_once(',').ok_or_else(bad)?;
            let start = u32::from_str_radix(start.trim(), 16).map_err(|_| bad())?;
            let end = u32::from_str_radix(end.trim(), 16).map_err(|_| bad())?;
            if start > end {
                return Err(bad());
            }
            ranges.push((start, end));
        }
        ranges.sort_unstable();
        let mut merged: Vec<(u32, u32)> = Vec::with_capacity(ranges.len());
        for (s, e) in ranges {
            match merged.last_mut() {
                Some(last) if s <= last.1.saturating_add(1) => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        Ok(Self { ranges: merged })
    }

    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        match self.ranges.binary_search_by(|&(s, _)| s.cmp(&cp)) {
            Ok(_) => true,
            Err(0) => false,
            Err(i) => cp <= self.ranges[i - 1].1,
        }
    }

    pub fn ranges(&self) -> &[(u32, u32)] {
        &self.ranges
    }
}

impl Default for EmojiTable {
    fn default() -> Self {
        Self::bundled()
    }
}

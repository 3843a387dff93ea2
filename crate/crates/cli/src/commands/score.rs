use maskshift::corpus::read_jsonl;
use maskshift::sentiment::{load_lexicon, polarity, Lexicon, RuleSet, Scorer};

use super::{require, write_csv, ScoreRow, FILTERED, SCORES};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::manifest::StageRun;

/// Rule set with the config's `[sentiment]` overrides applied in key order.
pub fn rules(cfg: &PipelineConfig) -> Result<RuleSet> {
    let mut rules = RuleSet::default();
    for (key, value) in &cfg.sentiment {
        let text = match value {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        rules.apply_override(key, &text)?;
    }
    Ok(rules)
}

pub fn scorer(cfg: &PipelineConfig) -> Result<Scorer> {
    let mut lexicon = match &cfg.paths.lexicon {
        Some(p) => load_lexicon(p)?,
        None => Lexicon::bundled(),
    };
    if let Some(p) = &cfg.paths.emoji_lexicon {
        lexicon = lexicon.load_emoji(p)?;
    }
    Ok(Scorer::new(lexicon, rules(cfg)?))
}

pub fn run(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = StageRun::start("score", cfg);
    let input = require(cfg, FILTERED, "filter")?;
    let records = read_jsonl(&input)?;
    stage.input(FILTERED, records.len());
    let scorer = scorer(cfg)?;
    let rows = records
        .iter()
        .map(|r| {
            let s = scorer.score(&r.sentiment_text);
            Ok(ScoreRow {
                id: r.id.clone(),
                author_id: r.author_id.clone(),
                created_at: r.created_at,
                compound: s.compound,
                pos: s.pos,
                neu: s.neu,
                neg: s.neg,
                polarity: polarity(s.compound)?.as_str().into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = write_csv(&cfg.out.join(SCORES), rows)?;
    stage.output(SCORES, n);
    stage.finish(cfg)
}

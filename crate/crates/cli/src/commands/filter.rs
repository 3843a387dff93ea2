use std::collections::HashMap;
use std::io::BufRead;
use std::time::Duration;

use maskshift::corpus::hydrate::RateLimit;
use maskshift::corpus::{
    filter_corpus, hydrate, load_org_scores, parse_record, to_jsonl, FilterOptions, FixtureBackend,
    HttpBackend, Hydrated, HydrateError, HydrationClient, RetryPolicy, Slot, TermDictionary,
};
use maskshift::demographics::ingest_annotations;

use super::{write_json, write_text, FILTERED, STATS};
use crate::config::{HydrateSection, PipelineConfig};
use crate::error::{CliError, Result};
use crate::manifest::StageRun;

const BUNDLED_TERMS: &str = include_str!("../../../../data/mask_terms.txt");

pub fn run(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = StageRun::start("filter", cfg);
    let dict = match &cfg.paths.terms {
        Some(p) => TermDictionary::load(p)?,
        None => TermDictionary::parse(BUNDLED_TERMS)?,
    };
    let org_scores = org_scores(cfg)?;
    let slots = match &cfg.hydrate {
        Some(h) => hydrated_slots(h)?,
        None => {
            let path = cfg.paths.corpus.as_ref().ok_or_else(|| {
                CliError::Config("paths.corpus or a [hydrate] section is required".into())
            })?;
            maskshift::corpus::read_jsonl(path)?
                .into_iter()
                .map(Slot::Present)
                .collect()
        }
    };
    stage.input("tweets", slots.len());
    let opts = FilterOptions {
        lang: &cfg.filter.lang,
        org_scores: &org_scores,
        org_threshold: cfg.filter.org_threshold,
    };
    let (kept, stats) = filter_corpus(slots, &dict, opts);
    debug_assert!(stats.is_conserved());
    let mut text = String::new();
    for r in &kept {
        text.push_str(&to_jsonl(r));
        text.push('\n');
    }
    write_text(&cfg.out.join(FILTERED), &text)?;
    write_json(&cfg.out.join(STATS), &stats)?;
    log::info!(
        "kept {} of {} (language {}, no match {}, deleted {}, org {})",
        stats.kept,
        stats.read,
        stats.dropped_language,
        stats.dropped_no_match,
        stats.dropped_deleted,
        stats.dropped_org
    );
    stage.output(FILTERED, kept.len());
    stage.finish(cfg)
}

/// Organization probabilities from `paths.org_scores`, else from the
/// annotations file.
fn org_scores(cfg: &PipelineConfig) -> Result<HashMap<String, f64>> {
    if let Some(p) = &cfg.paths.org_scores {
        return Ok(load_org_scores(p)?);
    }
    if let Some(p) = &cfg.paths.annotations {
        let (ann, _) = ingest_annotations(p)?;
        return Ok(ann.into_iter().map(|(k, a)| (k, a.org_probability)).collect());
    }
    Ok(HashMap::new())
}

fn hydrated_slots(h: &HydrateSection) -> Result<Vec<Slot>> {
    let file = std::fs::File::open(&h.ids).map_err(|e| CliError::read(&h.ids, e))?;
    let mut ids = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| CliError::read(&h.ids, e))?;
        let id = line.trim();
        if !id.is_empty() {
            ids.push(id.to_string());
        }
    }
    let client: Box<dyn HydrationClient> = match h.backend.as_str() {
        "fixture" => Box::new(
            FixtureBackend::open(h.fixture.as_deref().expect("validated")).map_err(hydrate_err)?,
        ),
        _ => Box::new(
            HttpBackend::from_env(RateLimit::new(Duration::from_millis(h.min_interval_ms)))
                .map_err(hydrate_err)?,
        ),
    };
    let policy = RetryPolicy {
        attempts: h.attempts.max(1),
        initial_backoff: Duration::from_millis(h.initial_backoff_ms),
    };
    let found = hydrate(&ids, client.as_ref(), policy).map_err(hydrate_err)?;
    ids.iter()
        .enumerate()
        .map(|(i, id)| match &found[id] {
            Hydrated::Found(raw) => Ok(Slot::Present(parse_record(raw.as_bytes(), i + 1)?)),
            Hydrated::Absent => Ok(Slot::Deleted(id.clone())),
        })
        .collect()
}

fn hydrate_err(e: HydrateError) -> CliError {
    if e.is_retryable() {
        CliError::Data(format!("hydration: {e}"))
    } else {
        CliError::Config(format!("hydration: {e}"))
    }
}

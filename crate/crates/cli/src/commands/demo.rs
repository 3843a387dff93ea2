use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use maskshift::corpus::{clean, read_jsonl};
use maskshift::demographics::{
    ingest_annotations, rank_attributes, Attributor, CollegeClassifier, ForestParams, GeoTable,
    GroupTable, NameRules, NgramNameModel, OverrideRule, PartyDirectory, UserEvidence,
    PROFILE_FIELDS,
};

use super::{require, write_csv, write_text, COLLEGE_ATTRIBUTES, COLLEGE_MODEL, FILTERED, PROFILES};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::manifest::StageRun;

const BUNDLED_NAMES: &str = include_str!("../../../../data/labeled_names.csv");

#[derive(Deserialize)]
struct TimelineLine {
    author_id: String,
    tweets: Vec<String>,
}

#[derive(Deserialize)]
struct CollegeLabel {
    author_id: String,
    is_college: bool,
}

#[derive(Serialize)]
struct AttributeRow<'a> {
    rank: usize,
    phrase: &'a str,
    pmi: f64,
    selected: bool,
}

/// Tokenized tweets per author.
type Timelines = BTreeMap<String, Vec<Vec<String>>>;

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::read(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::read(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

pub fn run(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = StageRun::start("demo", cfg);
    let records = read_jsonl(&require(cfg, FILTERED, "filter")?)?;
    stage.input(FILTERED, records.len());

    let mut users: BTreeMap<String, UserEvidence> = BTreeMap::new();
    if let Some(p) = &cfg.paths.users {
        let lines: Vec<UserEvidence> = read_lines(p)?;
        stage.input("users", lines.len());
        for u in lines {
            users.insert(u.author_id.clone(), u);
        }
    }
    for r in &records {
        users.entry(r.author_id.clone()).or_insert_with(|| UserEvidence {
            author_id: r.author_id.clone(),
            ..Default::default()
        });
    }

    let timelines = timelines(cfg, &records, &mut stage)?;

    let annotations = match &cfg.paths.annotations {
        Some(p) => {
            let (a, issues) = ingest_annotations(p)?;
            stage.input("annotations", a.len());
            if !issues.is_empty() {
                log::warn!("{} annotation rows skipped", issues.len());
            }
            Some(a)
        }
        None => None,
    };
    let college = match &cfg.paths.college_labels {
        Some(p) => Some(train_college(cfg, p, &timelines, stage.seed(), &mut stage)?),
        None => None,
    };
    let rules = NameRules::default();
    let name_model = match (&cfg.paths.name_model, &cfg.paths.labeled_names) {
        (Some(p), _) => NgramNameModel::load(p)?,
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::read(p, e))?;
            NgramNameModel::train_csv(&text, &rules)?
        }
        (None, None) => NgramNameModel::train_csv(BUNDLED_NAMES, &rules)?,
    };
    let groups = match &cfg.paths.ethnicity_groups {
        Some(p) => GroupTable::load(p)?,
        None => GroupTable::bundled(),
    };
    let geo = match (&cfg.paths.geo_cities, &cfg.paths.geo_incomes, &cfg.paths.geo_rucc) {
        (Some(c), Some(i), Some(r)) => Some(GeoTable::load(c, i, r, cfg.paths.geo_regions.as_deref())?),
        (None, None, None) => None,
        _ => {
            return Err(CliError::Config(
                "geo_cities, geo_incomes and geo_rucc must be given together".into(),
            ))
        }
    };
    let party = match &cfg.paths.party_accounts {
        Some(p) => Some(PartyDirectory::load(p, cfg.paths.political_keywords.as_deref())?),
        None => None,
    };

    let attributor = Attributor {
        annotations: annotations.as_ref(),
        college: college.as_ref(),
        names: Some((&name_model, &groups, &rules)),
        geo: geo.as_ref().map(|g| (g, cfg.demographics.national_median)),
        party: party.as_ref(),
    };
    let mut rows = Vec::with_capacity(users.len());
    for (id, user) in &users {
        let tl = timelines.get(id).map(Vec::as_slice);
        let p = attributor.attribute(user, tl)?;
        let mut row = vec![id.clone()];
        row.extend(p.values());
        rows.push(row);
    }
    let mut header = vec!["author_id"];
    header.extend(PROFILE_FIELDS);
    let n = write_csv(
        &cfg.out.join(PROFILES),
        std::iter::once(header.iter().map(|s| s.to_string()).collect()).chain(rows),
    )? - 1;
    stage.output(PROFILES, n);
    stage.finish(cfg)
}

/// Timelines from `paths.timelines` when given, else each author's
/// filtered tweets.
fn timelines(
    cfg: &PipelineConfig,
    records: &[maskshift::corpus::TweetRecord],
    stage: &mut StageRun,
) -> Result<Timelines> {
    let mut out = Timelines::new();
    match &cfg.paths.timelines {
        Some(p) => {
            let lines: Vec<TimelineLine> = read_lines(p)?;
            stage.input("timelines", lines.len());
            for l in lines {
                out.entry(l.author_id)
                    .or_default()
                    .extend(l.tweets.iter().map(|t| clean(t).tokens));
            }
        }
        None => {
            for r in records {
                out.entry(r.author_id.clone()).or_default().push(r.tokens.clone());
            }
        }
    }
    Ok(out)
}

/// Every `my <word>` bigram in the labeled timelines.
fn possessive_candidates(timelines: &[(Vec<String>, bool)]) -> Vec<String> {
    let mut set = BTreeSet::new();
    for (tl, _) in timelines {
        for w in tl.windows(2) {
            if w[0] == "my" && w[1].chars().all(char::is_alphabetic) {
                set.insert(format!("my {}", w[1]));
            }
        }
    }
    set.into_iter().collect()
}

fn train_college(
    cfg: &PipelineConfig,
    labels_path: &Path,
    timelines: &Timelines,
    seed: u64,
    stage: &mut StageRun,
) -> Result<CollegeClassifier> {
    let labels: Vec<CollegeLabel> = super::read_csv(labels_path)?;
    stage.input("college_labels", labels.len());
    let labeled: Vec<(Vec<String>, bool)> = labels
        .iter()
        .filter_map(|l| {
            let tl = timelines.get(&l.author_id)?;
            Some((tl.iter().flatten().cloned().collect(), l.is_college))
        })
        .collect();
    if labeled.len() < labels.len() {
        log::warn!(
            "{} labeled users have no timeline and are not used for training",
            labels.len() - labeled.len()
        );
    }
    let d = &cfg.demographics;
    let candidates = match &d.college_candidates {
        Some(c) => c.clone(),
        None => possessive_candidates(&labeled),
    };
    let ranked = rank_attributes(&labeled, &candidates)?;
    let vocabulary: Vec<String> = ranked
        .iter()
        .take(d.college_vocabulary)
        .map(|a| a.phrase.clone())
        .collect();
    let attr_rows = ranked.iter().enumerate().map(|(i, a)| AttributeRow {
        rank: i + 1,
        phrase: &a.phrase,
        pmi: a.pmi,
        selected: i < d.college_vocabulary,
    });
    write_csv(&cfg.out.join(COLLEGE_ATTRIBUTES), attr_rows)?;
    let (tls, ys): (Vec<Vec<String>>, Vec<bool>) = labeled.into_iter().unzip();
    let params = ForestParams {
        n_trees: d.n_trees,
        max_features: d.max_features,
        max_depth: d.max_depth,
        min_samples_split: d.min_samples_split,
        bootstrap: true,
    };
    let rule = OverrideRule {
        terms: d.override_terms.iter().map(|t| t.to_lowercase()).collect(),
        min_count: d.override_min_count,
    };
    let model = CollegeClassifier::train(&tls, &ys, &vocabulary, &params, rule, seed)?;
    write_text(&cfg.out.join(COLLEGE_MODEL), &(model.to_json() + "\n"))?;
    stage.output(COLLEGE_MODEL, 1);
    Ok(model)
}

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::lda::{fit, LdaModel, LdaParams};
use super::{Document, TopicsError};
use crate::corpus::TweetRecord;

/// Word indices of topic `k` ranked by count, ties by token.
pub fn top_words(model: &LdaModel, k: usize, m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..model.vocab.len()).collect();
    idx.sort_by(|&a, &b| {
        model.topic_word[k][b]
            .cmp(&model.topic_word[k][a])
            .then_with(|| model.vocab[a].cmp(&model.vocab[b]))
    });
    idx.truncate(m);
    idx
}

/// UMass coherence averaged over topics. For each topic's top `top_m`
/// words `w_1..w_m` (by rank) it sums `ln((D(w_i, w_j) + 1) / D(w_j))` over
/// `i < j`, with document frequencies taken from `docs`. Pairs whose
/// denominator is zero are skipped.
pub fn coherence(model: &LdaModel, docs: &[Document], top_m: usize) -> f64 {
    let sets: Vec<HashSet<usize>> = docs
        .iter()
        .map(|d| d.lemmas.iter().filter_map(|t| model.word_index(t)).collect())
        .collect();
    let df = |w: usize| sets.iter().filter(|s| s.contains(&w)).count();
    let codf = |a: usize, b: usize| sets.iter().filter(|s| s.contains(&a) && s.contains(&b)).count();
    let mut total = 0.0;
    for k in 0..model.k {
        let top = top_words(model, k, top_m);
        let mut score = 0.0;
        for i in 0..top.len() {
            for j in i + 1..top.len() {
                let d = df(top[j]);
                if d == 0 {
                    continue;
                }
                score += ((codf(top[i], top[j]) as f64 + 1.0) / d as f64).ln();
            }
        }
        total += score;
    }
    total / model.k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectParams {
    pub candidates: Vec<usize>,
    /// `alpha = None` uses `50 / K` per candidate.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub top_m: usize,
    pub seed: u64,
}

impl Default for SelectParams {
    fn default() -> Self {
        Self {
            candidates: vec![2, 3, 4, 5, 6, 7, 8],
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            top_m: 10,
            seed: 0,
        }
    }
}

fn seed_for(seed: u64, k: usize) -> u64 {
    // splitmix64 finalizer over (seed, K)
    let mut z = seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fits one model per candidate K and returns the most coherent (smaller K
/// on ties) with the full `(K, coherence)` table in ascending K.
pub fn select_model(
    docs: &[Document],
    params: &SelectParams,
) -> Result<(LdaModel, Vec<(usize, f64)>), TopicsError> {
    let mut ks = params.candidates.clone();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(TopicsError::Config("no candidate topic counts".into()));
    }
    let mut table = Vec::new();
    let mut best: Option<(f64, LdaModel)> = None;
    for k in ks {
        let lda = LdaParams {
            k,
            alpha: params.alpha,
            beta: params.beta,
            iterations: params.iterations,
        };
        let model = fit(docs, &lda, seed_for(params.seed, k))?;
        let c = coherence(&model, docs, params.top_m);
        table.push((k, c));
        if best.as_ref().map_or(true, |(b, _)| c > *b) {
            best = Some((c, model));
        }
    }
    Ok((best.unwrap().1, table))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub token: String,
    pub count: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub source_id: String,
    pub proportion: f64,
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic: usize,
    pub keywords: Vec<Keyword>,
    pub examples: Vec<Example>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub k: usize,
    pub coherence: f64,
    pub topics: Vec<TopicSummary>,
}

/// Top keywords by weight (ties by token) and the documents with the
/// highest topic proportion (ties by id), with their tweet text. Coherence
/// uses the top `top_keywords` words.
pub fn report(
    model: &LdaModel,
    docs: &[Document],
    records: &[TweetRecord],
    top_keywords: usize,
    top_examples: usize,
) -> TopicReport {
    let text: HashMap<&str, &str> = records
        .iter()
        .map(|r| (r.id.as_str(), r.raw_text.as_str()))
        .collect();
    let theta: Vec<Vec<f64>> = (0..model.num_docs())
        .map(|d| model.doc_topic_distribution(d))
        .collect();
    let topics = (0..model.k)
        .map(|k| {
            let phi = model.topic_word_distribution(k);
            let mut kw: Vec<Keyword> = model
                .vocab
                .iter()
                .enumerate()
                .map(|(i, t)| Keyword {
                    token: t.clone(),
                    count: model.topic_word[k][i],
                    weight: phi[i],
                })
                .collect();
            kw.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.token.cmp(&b.token)));
            kw.truncate(top_keywords);
            let mut ex: Vec<Example> = model
                .doc_ids
                .iter()
                .zip(&theta)
                .map(|(id, th)| Example {
                    source_id: id.clone(),
                    proportion: th[k],
                    text: text.get(id.as_str()).map(|s| s.to_string()),
                })
                .collect();
            ex.sort_by(|a, b| {
                b.proportion
                    .total_cmp(&a.proportion)
                    .then_with(|| a.source_id.cmp(&b.source_id))
            });
            ex.truncate(top_examples);
            TopicSummary {
                topic: k,
                keywords: kw,
                examples: ex,
            }
        })
        .collect();
    TopicReport {
        k: model.k,
        coherence: coherence(model, docs, top_keywords),
        topics,
    }
}

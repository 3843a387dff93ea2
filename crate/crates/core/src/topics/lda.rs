use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Document, TopicsError};

const CONTAINER_FORMAT: &str = "maskshift-lda";
const CONTAINER_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    /// Symmetric document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
}

impl LdaParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }
}

/// Fitted LDA state. Only nonempty documents take part; `doc_ids` lists
/// them in fitting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub vocab: Vec<String>,
    pub doc_ids: Vec<String>,
    pub topic_word: Vec<Vec<u32>>,
    pub topic_totals: Vec<u32>,
    pub doc_topic: Vec<Vec<u32>>,
    /// Word index and topic of every position, per document.
    pub words: Vec<Vec<u32>>,
    pub assignments: Vec<Vec<u32>>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    model: LdaModel,
}

impl LdaModel {
    pub fn word_index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    /// `(count + beta) / (total + V * beta)` for topic `k`.
    pub fn topic_word_distribution(&self, k: usize) -> Vec<f64> {
        let v = self.vocab.len() as f64;
        let den = self.topic_totals[k] as f64 + v * self.beta;
        self.topic_word[k]
            .iter()
            .map(|&c| (c as f64 + self.beta) / den)
            .collect()
    }

    /// `(count + alpha) / (len + K * alpha)` for fitted document `d`.
    pub fn doc_topic_distribution(&self, d: usize) -> Vec<f64> {
        let den = self.words[d].len() as f64 + self.k as f64 * self.alpha;
        self.doc_topic[d]
            .iter()
            .map(|&c| (c as f64 + self.alpha) / den)
            .collect()
    }

    /// Recounts everything from the assignments and compares.
    pub fn check_consistency(&self) -> Result<(), String> {
        let v = self.vocab.len();
        let mut tw = vec![vec![0u32; v]; self.k];
        let mut tt = vec![0u32; self.k];
        for (d, (ws, zs)) in self.words.iter().zip(&self.assignments).enumerate() {
            if ws.len() != zs.len() {
                return Err(format!("doc {d}: {} words but {} assignments", ws.len(), zs.len()));
            }
            let mut dt = vec![0u32; self.k];
            for (&w, &z) in ws.iter().zip(zs) {
                tw[z as usize][w as usize] += 1;
                tt[z as usize] += 1;
                dt[z as usize] += 1;
            }
            if dt != self.doc_topic[d] {
                return Err(format!("doc {d}: doc-topic counts disagree with assignments"));
            }
            if dt.iter().sum::<u32>() as usize != ws.len() {
                return Err(format!("doc {d}: doc-topic total differs from length"));
            }
        }
        if tw != self.topic_word {
            return Err("topic-word counts disagree with assignments".into());
        }
        if tt != self.topic_totals {
            return Err("topic totals disagree with assignments".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Container {
            format: CONTAINER_FORMAT.into(),
            version: CONTAINER_VERSION,
            model: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TopicsError> {
        let c: Container =
            serde_json::from_str(text).map_err(|e| TopicsError::Model(e.to_string()))?;
        if c.format != CONTAINER_FORMAT || c.version != CONTAINER_VERSION {
            return Err(TopicsError::Model(format!(
                "unsupported container {} v{}",
                c.format, c.version
            )));
        }
        let mut m = c.model;
        m.index = m.vocab.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        m.check_consistency().map_err(TopicsError::Model)?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), TopicsError> {
        std::fs::write(path, self.to_json()).map_err(|source| TopicsError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TopicsError> {
        let text = std::fs::read_to_string(path).map_err(|source| TopicsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

pub fn fit(docs: &[Document], params: &LdaParams, seed: u64) -> Result<LdaModel, TopicsError> {
    fit_with_observer(docs, params, seed, |_, _| {})
}

/// Collapsed Gibbs sampling. `observer` runs after every sweep with the
/// 1-based sweep number.
pub fn fit_with_observer(
    docs: &[Document],
    params: &LdaParams,
    seed: u64,
    mut observer: impl FnMut(&LdaModel, usize),
) -> Result<LdaModel, TopicsError> {
    let k = params.k;
    let alpha = params.alpha();
    if k < 2 {
        return Err(TopicsError::Config(format!("K must be at least 2, got {k}")));
    }
    if !(alpha > 0.0 && params.beta > 0.0) {
        return Err(TopicsError::Config("alpha and beta must be positive".into()));
    }
    let fitted: Vec<&Document> = docs.iter().filter(|d| !d.lemmas.is_empty()).collect();
    if fitted.len() < k {
        return Err(TopicsError::Degenerate(format!(
            "{} nonempty documents for K = {k}",
            fitted.len()
        )));
    }
    let vocab: Vec<String> = fitted
        .iter()
        .flat_map(|d| d.lemmas.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<String, usize> =
        vocab.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let v = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut m = LdaModel {
        k,
        alpha,
        beta: params.beta,
        seed,
        iterations: params.iterations,
        vocab,
        doc_ids: fitted.iter().map(|d| d.source_id.clone()).collect(),
        topic_word: vec![vec![0; v]; k],
        topic_totals: vec![0; k],
        doc_topic: vec![vec![0; k]; fitted.len()],
        words: Vec::with_capacity(fitted.len()),
        assignments: Vec::with_capacity(fitted.len()),
        index,
    };
    for (d, doc) in fitted.iter().enumerate() {
        let ws: Vec<u32> = doc.lemmas.iter().map(|t| m.index[t] as u32).collect();
        let zs: Vec<u32> = ws.iter().map(|_| rng.gen_range(0..k) as u32).collect();
        for (&w, &z) in ws.iter().zip(&zs) {
            m.topic_word[z as usize][w as usize] += 1;
            m.topic_totals[z as usize] += 1;
            m.doc_topic[d][z as usize] += 1;
        }
        m.words.push(ws);
        m.assignments.push(zs);
    }

    let vbeta = v as f64 * m.beta;
    let mut p = vec![0.0f64; k];
    for sweep in 1..=params.iterations {
        for d in 0..m.words.len() {
            for i in 0..m.words[d].len() {
                let w = m.words[d][i] as usize;
                let old = m.assignments[d][i] as usize;
                m.topic_word[old][w] -= 1;
                m.topic_totals[old] -= 1;
                m.doc_topic[d][old] -= 1;
                let mut total = 0.0;
                for (t, slot) in p.iter_mut().enumerate() {
                    total += (m.doc_topic[d][t] as f64 + alpha)
                        * (m.topic_word[t][w] as f64 + m.beta)
                        / (m.topic_totals[t] as f64 + vbeta);
                    *slot = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = p.iter().position(|&c| u < c).unwrap_or(k - 1);
                m.topic_word[new][w] += 1;
                m.topic_totals[new] += 1;
                m.doc_topic[d][new] += 1;
                m.assignments[d][i] = new as u32;
            }
        }
        observer(&m, sweep);
    }
    Ok(m)
}

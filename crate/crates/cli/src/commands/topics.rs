use serde::Serialize;

use maskshift::corpus::read_jsonl;
use maskshift::topics::{
    merge_ngrams, preprocess, report, select_model, PosLexicon, SelectParams, Stopwords,
    TopicReport,
};

use super::{require, write_json, write_text, FILTERED, LDA_MODEL, TOPICS};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::manifest::StageRun;

#[derive(Serialize)]
struct Candidate {
    k: usize,
    coherence: f64,
}

#[derive(Serialize)]
struct TopicsArtifact {
    documents: usize,
    vocabulary: usize,
    candidates: Vec<Candidate>,
    report: TopicReport,
}

pub fn run(cfg: &PipelineConfig) -> Result<()> {
    let mut stage = StageRun::start("topics", cfg);
    let records = read_jsonl(&require(cfg, FILTERED, "filter")?)?;
    stage.input(FILTERED, records.len());

    let mut stopwords = match &cfg.paths.stopwords {
        Some(p) => Stopwords::load(p)?,
        None => Stopwords::bundled(),
    };
    if let Some(p) = &cfg.paths.custom_stopwords {
        stopwords.extend(&Stopwords::load(p)?);
    }
    let lexicon = match &cfg.paths.pos_lexicon {
        Some(p) => PosLexicon::load(p)?,
        None => PosLexicon::bundled(),
    };
    let t = &cfg.topics;
    let docs = preprocess(&records, &stopwords, &lexicon);
    let docs = merge_ngrams(&docs, t.ngram_min_count, t.ngram_threshold);
    let params = SelectParams {
        candidates: t.candidates.clone(),
        alpha: t.alpha,
        beta: t.beta,
        iterations: t.iterations,
        top_m: t.top_m,
        seed: stage.seed(),
    };
    let (model, table) = select_model(&docs, &params)?;
    log::info!("selected K = {} of {:?}", model.k, t.candidates);
    let rep = report(&model, &docs, &records, t.top_keywords, t.top_examples);
    let artifact = TopicsArtifact {
        documents: model.num_docs(),
        vocabulary: model.vocab.len(),
        candidates: table
            .into_iter()
            .map(|(k, coherence)| Candidate { k, coherence })
            .collect(),
        report: rep,
    };
    write_json(&cfg.out.join(TOPICS), &artifact)?;
    write_text(&cfg.out.join(LDA_MODEL), &(model.to_json() + "\n"))?;
    stage.output(TOPICS, artifact.report.topics.len());
    stage.finish(cfg)
}

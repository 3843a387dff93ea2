use maskshift::topics::{
    coherence, fit, fit_with_observer, merge_ngrams, select_model, Document, LdaModel, LdaParams,
    SelectParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two topics over disjoint ten-word vocabularies with skewed weights.
fn planted(n_docs: usize, seed: u64) -> (Vec<Document>, [Vec<(String, f64)>; 2]) {
    let weights: Vec<f64> = (1..=10).map(|i| 1.0 / i as f64).collect();
    let total: f64 = weights.iter().sum();
    let topic = |prefix: &str| -> Vec<(String, f64)> {
        weights
            .iter()
            .enumerate()
            .map(|(i, w)| (format!("{prefix}{i}"), w / total))
            .collect()
    };
    let topics = [topic("a"), topic("b")];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = (0..n_docs)
        .map(|d| {
            let main = d % 2;
            let len = rng.gen_range(10..30);
            let lemmas = (0..len)
                .map(|_| {
                    let t = if rng.gen::<f64>() < 0.9 { main } else { 1 - main };
                    let mut u = rng.gen::<f64>();
                    for (w, p) in &topics[t] {
                        if u < *p {
                            return w.clone();
                        }
                        u -= p;
                    }
                    topics[t][9].0.clone()
                })
                .collect();
            Document {
                source_id: d.to_string(),
                lemmas,
            }
        })
        .collect();
    (docs, topics)
}

/// Greedy matching of learned to planted topics by total-variation distance.
fn matched_tv(model: &LdaModel, planted: &[Vec<(String, f64)>; 2]) -> Vec<f64> {
    let learned: Vec<Vec<f64>> = (0..model.k).map(|k| model.topic_word_distribution(k)).collect();
    let tv = |k: usize, p: usize| -> f64 {
        let mut truth = vec![0.0; model.vocab.len()];
        for (w, q) in &planted[p] {
            if let Some(i) = model.word_index(w) {
                truth[i] = *q;
            }
        }
        0.5 * learned[k].iter().zip(&truth).map(|(a, b)| (a - b).abs()).sum::<f64>()
    };
    let mut pairs: Vec<(f64, usize, usize)> = (0..model.k)
        .flat_map(|k| (0..2).map(move |p| (k, p)))
        .map(|(k, p)| (tv(k, p), k, p))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut used_k, mut used_p, mut out) = (vec![], vec![], vec![]);
    for (d, k, p) in pairs {
        if !used_k.contains(&k) && !used_p.contains(&p) {
            used_k.push(k);
            used_p.push(p);
            out.push(d);
        }
    }
    out
}

fn planted_params() -> LdaParams {
    LdaParams {
        k: 2,
        alpha: Some(0.5),
        beta: 0.01,
        iterations: 200,
    }
}

#[test]
fn planted_topics_are_recovered() {
    let mut ok = 0;
    for seed in 0..20 {
        let (docs, truth) = planted(500, 1000 + seed);
        let m = fit(&docs, &planted_params(), seed).unwrap();
        if matched_tv(&m, &truth).iter().all(|&d| d < 0.2) {
            ok += 1;
        }
    }
    assert!(ok >= 18, "{ok}/20 seeds recovered");
}

#[test]
fn two_topics_beat_eight_on_coherence() {
    let (docs, _) = planted(300, 7);
    let p = SelectParams {
        candidates: vec![2, 8],
        alpha: Some(0.5),
        iterations: 200,
        top_m: 10,
        ..Default::default()
    };
    let (m, table) = select_model(&docs, &p).unwrap();
    assert_eq!(m.k, 2, "{table:?}");
}

#[test]
fn single_document_pairs_all_cooccur() {
    let docs = vec![
        Document { source_id: "1".into(), lemmas: vec!["a".into(), "b".into(), "c".into()] },
        Document { source_id: "2".into(), lemmas: vec![] },
    ];
    let mut two = docs.clone();
    two[1].lemmas = vec!["a".into()];
    let m = fit(&two, &LdaParams { iterations: 5, ..LdaParams::new(2) }, 1).unwrap();
    // one document: every pair has D(wi, wj) = D(wj) = 1
    let c = coherence(&m, &docs[..1], 3);
    assert!((c - 3.0 * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn trigram_second_pass() {
    let docs: Vec<Document> = (0..12)
        .map(|i| Document {
            source_id: i.to_string(),
            lemmas: vec!["face".into(), "mask".into(), "mandate".into(), format!("w{i}")],
        })
        .collect();
    let merged = merge_ngrams(&docs, 1, 0.5);
    assert!(merged.iter().all(|d| d.lemmas[0] == "face_mask_mandate"), "{:?}", merged[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counts_consistent_after_every_sweep(seed in any::<u64>(), k in 2usize..5) {
        let (docs, _) = planted(50, seed);
        let params = LdaParams { k, alpha: None, beta: 0.01, iterations: 15 };
        let mut sweeps = 0;
        let mut failure = None;
        let m = fit_with_observer(&docs, &params, seed, |m, _| {
            sweeps += 1;
            if let Err(e) = m.check_consistency() {
                failure.get_or_insert(e);
            }
        }).unwrap();
        prop_assert_eq!(sweeps, 15);
        prop_assert_eq!(failure, None);
        for t in 0..m.k {
            prop_assert!((m.topic_word_distribution(t).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p maskshift-cli --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use maskshift::changepoint::{
    associate_events, brute_force, default_beta, pelt, CostKind, CostModel, EventCatalog,
    Segmentation, SentimentSeries, TIE_TOLERANCE,
};
use maskshift::demographics::{
    income_bracket, infer_party, metro_class, CollegeClassifier, ForestParams, IncomeBracket,
    MetroClass, OverrideRule, Party, PartyDirectory, NATIONAL_MEDIAN_INCOME_2018,
};
use maskshift::sentiment::{polarity, Lexicon, Polarity, RuleSet, Scorer};
use maskshift::topics::{fit, fit_with_observer, Document, LdaModel, LdaParams};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn series_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- PELT

fn pelt_exactness() -> Verdict {
    const CASES: usize = 5000;
    let started = Instant::now();
    let mut rng = series_rng(1);
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for _ in 0..CASES {
        let n = rng.gen_range(2..=12);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1..=1) as f64).collect();
        for kind in CostKind::ALL {
            let m = CostModel::new(kind);
            for beta in [0.1, 1.0, 10.0] {
                let p = pelt(&y, &m, beta).unwrap();
                let b = brute_force(&y, &m, beta, 12).unwrap();
                checked += 1;
                if (p.objective - b.objective).abs() > TIE_TOLERANCE || p.breakpoints != b.breakpoints {
                    mismatches.push(format!("{kind} beta={beta} y={y:?}"));
                }
            }
        }
    }
    let took = started.elapsed();
    verdict(
        mismatches.is_empty() && took < Duration::from_secs(120),
        format!(
            "{checked} comparisons over {CASES} series, {} mismatches, {:.1}s{}",
            mismatches.len(),
            took.as_secs_f64(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn planted_recovery() -> Verdict {
    const N: usize = 200;
    let started = Instant::now();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let beta = default_beta(N);

    let mean_model = CostModel::new(CostKind::MeanShift);
    let (mut mean_hits, mut mean_extra) = (0, 0);
    for seed in 0..100 {
        let mut rng = series_rng(10_000 + seed);
        let tau = rng.gen_range(40..=160);
        let y: Vec<f64> = (1..=N)
            .map(|t| normal.sample(&mut rng) + if t > tau { 5.0 } else { 0.0 })
            .collect();
        let seg = pelt(&y, &mean_model, beta).unwrap();
        if seg.breakpoints.iter().any(|b| b.abs_diff(tau) <= 1) {
            mean_hits += 1;
        }
        if seg.breakpoints.len() > 1 {
            mean_extra += 1;
        }
    }

    let var_model = CostModel::new(CostKind::VarianceShift);
    let (mut var_hits, mut var_extra) = (0, 0);
    for seed in 0..100 {
        let mut rng = series_rng(20_000 + seed);
        let tau = rng.gen_range(40..=160);
        let y: Vec<f64> = (1..=N)
            .map(|t| normal.sample(&mut rng) * if t > tau { 4.0 } else { 1.0 })
            .collect();
        let seg = pelt(&y, &var_model, beta).unwrap();
        if seg.breakpoints.iter().any(|b| b.abs_diff(tau) <= 3) {
            var_hits += 1;
        }
        if seg.breakpoints.len() > 1 {
            var_extra += 1;
        }
    }
    let took = started.elapsed();
    verdict(
        mean_hits >= 95 && var_hits >= 90 && took < Duration::from_secs(60),
        format!(
            "mean shift 5 sigma: {mean_hits}/100 within +-1 ({mean_extra} with extra breakpoints); variance ratio 4: {var_hits}/100 within +-3 ({var_extra} with extra breakpoints); {:.2}s",
            took.as_secs_f64()
        ),
    )
}

fn penalty_monotonicity() -> Verdict {
    let betas: Vec<f64> = (0..10).map(|i| 0.05 * 2f64.powi(i)).collect();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut violations = Vec::new();
    for seed in 0..50u64 {
        let mut rng = series_rng(30_000 + seed);
        let n = rng.gen_range(20..=80);
        let level_every = rng.gen_range(5..=20);
        let y: Vec<f64> = (0..n)
            .map(|t| ((t / level_every) % 3) as f64 + 0.5 * normal.sample(&mut rng))
            .collect();
        for kind in CostKind::ALL {
            let m = CostModel::new(kind);
            let ks: Vec<usize> = betas
                .iter()
                .map(|&b| pelt(&y, &m, b).unwrap().breakpoints.len())
                .collect();
            if ks.windows(2).any(|w| w[1] > w[0]) {
                violations.push(format!("seed {seed} {kind}: {ks:?}"));
            }
        }
    }
    verdict(
        violations.is_empty(),
        format!(
            "50 series x 3 costs x 10 betas, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

// ----------------------------------------------------------- sentiment

const POSITIVE_WORDS: &[&str] = &["good", "great", "happy", "love", "nice", "wonderful", "glad", "excellent"];
const NEGATIVE_WORDS: &[&str] = &["bad", "terrible", "sad", "hate", "awful", "horrible", "angry", "ugly"];
const NEGATORS: &[&str] = &["not", "never", "cannot"];
const BOOSTERS: &[&str] = &["very", "extremely", "really", "totally", "so"];
const FILLER: &[&str] = &["the", "mask", "today", "is", "people", "store", "it"];

fn sentiment_algebra() -> Verdict {
    let scorer = Scorer::new(Lexicon::bundled(), RuleSet::default());
    let mut rng = series_rng(40_000);
    let mut violations: Vec<String> = Vec::new();
    let mut cases = 0;
    let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| xs[rng.gen_range(0..xs.len())];
    let word = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.5) {
            pick(rng, POSITIVE_WORDS)
        } else {
            pick(rng, NEGATIVE_WORDS)
        }
    };

    // boundedness on random mixtures, including caps and exclamations
    for _ in 0..50 {
        cases += 1;
        let mut parts = Vec::new();
        for _ in 0..rng.gen_range(1..15) {
            let w = match rng.gen_range(0..4) {
                0 => pick(&mut rng, BOOSTERS),
                1 => pick(&mut rng, NEGATORS),
                2 => pick(&mut rng, FILLER),
                _ => word(&mut rng),
            };
            parts.push(if rng.gen_bool(0.2) { w.to_uppercase() } else { w.to_string() });
        }
        let text = parts.join(" ") + &"!".repeat(rng.gen_range(0..6));
        let c = scorer.score(&text).compound;
        if !(-1.0..=1.0).contains(&c) {
            violations.push(format!("bound: {text:?} -> {c}"));
        }
    }
    // negation flips the sign
    for _ in 0..50 {
        cases += 1;
        let w = word(&mut rng);
        let neg = pick(&mut rng, NEGATORS);
        let prefix = pick(&mut rng, FILLER);
        let plain = scorer.score(&format!("{prefix} {w}")).compound;
        let negated = scorer.score(&format!("{prefix} {neg} {w}")).compound;
        if plain == 0.0 || plain.signum() == negated.signum() || negated == 0.0 {
            violations.push(format!("negation: {w} {plain} vs {neg} {w} {negated}"));
        }
    }
    // boosters raise magnitude
    for _ in 0..50 {
        cases += 1;
        let w = word(&mut rng);
        let b = pick(&mut rng, BOOSTERS);
        let plain = scorer.score(&format!("the mask is {w}")).compound;
        let boosted = scorer.score(&format!("the mask is {b} {w}")).compound;
        if !(boosted.abs() > plain.abs() && boosted.signum() == plain.signum()) {
            violations.push(format!("booster: {w} {plain} vs {b} {w} {boosted}"));
        }
    }
    // polarity convention: any nonzero compound has its sign
    let fixed = [(0.04, Polarity::Positive), (-0.04, Polarity::Negative), (0.0, Polarity::Neutral)];
    for i in 0..50 {
        cases += 1;
        let (c, want) = if i < fixed.len() {
            fixed[i]
        } else {
            let c: f64 = rng.gen_range(-1.0..=1.0);
            let want = if c > 0.0 {
                Polarity::Positive
            } else if c < 0.0 {
                Polarity::Negative
            } else {
                Polarity::Neutral
            };
            (c, want)
        };
        if polarity(c).ok() != Some(want) {
            violations.push(format!("polarity: {c}"));
        }
    }
    verdict(
        violations.is_empty() && cases == 200,
        format!(
            "{cases} cases, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

// --------------------------------------------------------------- topics

/// Two topics over disjoint ten-word vocabularies, 1/rank word weights;
/// each document draws 90% of its words from its own topic.
fn planted_corpus(n_docs: usize, seed: u64) -> (Vec<Document>, [Vec<(String, f64)>; 2]) {
    let weights: Vec<f64> = (1..=10).map(|i| 1.0 / i as f64).collect();
    let total: f64 = weights.iter().sum();
    let topic = |prefix: &str| -> Vec<(String, f64)> {
        weights
            .iter()
            .enumerate()
            .map(|(i, w)| (format!("{prefix}{i}"), w / total))
            .collect()
    };
    let topics = [topic("x"), topic("y")];
    let mut rng = series_rng(seed);
    let docs = (0..n_docs)
        .map(|d| {
            let own = d % 2;
            let len = rng.gen_range(10..30);
            let lemmas = (0..len)
                .map(|_| {
                    let t = if rng.gen::<f64>() < 0.9 { own } else { 1 - own };
                    let mut u: f64 = rng.gen();
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
                source_id: format!("d{d}"),
                lemmas,
            }
        })
        .collect();
    (docs, topics)
}

/// Greedy one-to-one matching by total-variation distance, smallest first.
fn matched_distances(model: &LdaModel, truth: &[Vec<(String, f64)>; 2]) -> Vec<f64> {
    let mut pairs = Vec::new();
    for k in 0..model.k {
        let phi = model.topic_word_distribution(k);
        for (p, planted) in truth.iter().enumerate() {
            let mut q = vec![0.0; model.vocab.len()];
            for (w, pr) in planted {
                if let Some(i) = model.word_index(w) {
                    q[i] = *pr;
                }
            }
            let tv = 0.5 * phi.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
            pairs.push((tv, k, p));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut ks, mut ps, mut out) = (BTreeSet::new(), BTreeSet::new(), Vec::new());
    for (tv, k, p) in pairs {
        if ks.insert(k) && ps.insert(p) {
            out.push(tv);
        } else {
            ks.insert(k);
        }
    }
    out
}

fn lda_planted() -> Verdict {
    let params = LdaParams {
        k: 2,
        alpha: Some(0.5),
        beta: 0.01,
        iterations: 200,
    };
    let mut recovered = 0;
    let mut worst = Vec::new();
    for seed in 0..20u64 {
        let (docs, truth) = planted_corpus(500, 50_000 + seed);
        let model = fit(&docs, &params, seed).unwrap();
        let d = matched_distances(&model, &truth);
        let max = d.iter().cloned().fold(0.0, f64::max);
        worst.push(max);
        if d.len() == 2 && max < 0.2 {
            recovered += 1;
        }
    }
    let (small, _) = planted_corpus(50, 7);
    let mut sweeps = 0;
    let mut broken = Vec::new();
    fit_with_observer(&small, &LdaParams { iterations: 100, ..params }, 3, |m, sweep| {
        sweeps += 1;
        if let Err(e) = m.check_consistency() {
            broken.push(format!("sweep {sweep}: {e}"));
        }
    })
    .unwrap();
    let worst_tv = worst.iter().cloned().fold(0.0, f64::max);
    verdict(
        recovered >= 18 && broken.is_empty() && sweeps == 100,
        format!(
            "{recovered}/20 seeds with matched TV < 0.2 (worst {worst_tv:.3}); counts consistent after {sweeps} sweeps, {} violations",
            broken.len()
        ),
    )
}

// --------------------------------------------------------- demographics

fn demographic_rules() -> Verdict {
    let mut wrong = Vec::new();
    let national = NATIONAL_MEDIAN_INCOME_2018;
    for (median, want) in [
        (63_178, IncomeBracket::Below),
        (63_179, IncomeBracket::Equal),
        (63_180, IncomeBracket::Above),
    ] {
        if income_bracket(median, national) != want {
            wrong.push(format!("income {median}"));
        }
    }
    for code in 1..=9u8 {
        let want = if code <= 3 { MetroClass::Metro } else { MetroClass::NonMetro };
        if metro_class(code) != want {
            wrong.push(format!("rucc {code}"));
        }
    }
    let dir = PartyDirectory::parse(
        "account_id,party\nd1,Democrat\nr1,Republican\n",
        "election\nmask mandate\n",
    )
    .unwrap();
    let political = vec![vec!["the".to_string(), "election".into(), "is".into(), "close".into()]];
    let apolitical = vec![vec!["nice".to_string(), "weather".into()]];
    let ids = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let table = [
        (&political, ids(&["d1", "z"]), Some(Party::Democrat)),
        (&political, ids(&["r1"]), Some(Party::Republican)),
        (&political, ids(&["d1", "r1"]), None),
        (&apolitical, ids(&["d1"]), None),
        (&apolitical, ids(&["r1"]), None),
        (&apolitical, ids(&["d1", "r1"]), None),
    ];
    for (i, (tweets, following, want)) in table.iter().enumerate() {
        if infer_party(tweets, following, &dir) != *want {
            wrong.push(format!("party case {i}"));
        }
    }
    verdict(
        wrong.is_empty(),
        format!("3 income, 9 RUCC, 6 party cases; wrong: {wrong:?}"),
    )
}

fn college_classifier() -> Verdict {
    let student = ["my professor", "my dorm", "my roommate", "my exam"];
    let adult = ["my boss", "my kids", "my mortgage", "my commute"];
    let filler = ["coffee", "weather", "game", "tonight", "news", "dinner"];
    let make = |rng: &mut ChaCha8Rng, college: bool| -> Vec<String> {
        let pool = if college { &student } else { &adult };
        let mut toks = Vec::new();
        for _ in 0..rng.gen_range(2..6) {
            toks.extend(pool[rng.gen_range(0..4)].split(' ').map(String::from));
            toks.push(filler[rng.gen_range(0..filler.len())].to_string());
        }
        toks
    };
    let mut rng = series_rng(60_000);
    let train: Vec<(Vec<String>, bool)> =
        (0..80).map(|i| (make(&mut rng, i % 2 == 0), i % 2 == 0)).collect();
    let test: Vec<(Vec<String>, bool)> =
        (0..80).map(|i| (make(&mut rng, i % 3 == 0), i % 3 == 0)).collect();
    let vocab: Vec<String> = student.iter().chain(&adult).map(|s| s.to_string()).collect();
    let (tls, ys): (Vec<_>, Vec<_>) = train.iter().cloned().unzip();
    let model = CollegeClassifier::train(
        &tls,
        &ys,
        &vocab,
        &ForestParams::default(),
        OverrideRule::default(),
        11,
    )
    .unwrap();
    let correct = test.iter().filter(|(t, y)| model.predict(t) == *y).count();
    let train_correct = train.iter().filter(|(t, y)| model.predict(t) == *y).count();

    // an adult timeline that mentions a professor five times
    let mut tl = make(&mut rng, false);
    let forest_alone = model.forest.predict(&model.vectorizer.transform(&tl));
    tl.extend(std::iter::repeat("professor".to_string()).take(4));
    let at_four = model.predict(&tl);
    tl.push("professor".into());
    let at_five = model.predict(&tl);
    let fires = model.override_rule.fires(&tl);
    verdict(
        correct == test.len()
            && train_correct == train.len()
            && !forest_alone
            && !at_four
            && at_five
            && fires,
        format!(
            "held-out accuracy {correct}/{}, training {train_correct}/{}; forest vote on adult timeline {forest_alone}; override at 4 = {at_four}, at 5 = {at_five}",
            test.len(),
            train.len()
        ),
    )
}

// ---------------------------------------------------------- end to end

fn end_to_end() -> Verdict {
    let started = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = common::fixture_config();
    for out in [a.path(), b.path()] {
        for s in common::STAGES {
            let o = common::maskshift(&cfg, out, &[s]);
            if !o.status.success() {
                return verdict(
                    false,
                    format!("maskshift {s} failed: {}", String::from_utf8_lossy(&o.stderr)),
                );
            }
        }
    }
    let seg = common::read_json(&a.path().join("segmentation.json"));
    let all = seg["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["key"] == "all")
        .expect("all series segmented");
    let bps: Vec<u64> = all["segmentation"]["breakpoints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["index"].as_u64().unwrap())
        .collect();
    let found = bps.iter().any(|&i| i.abs_diff(20) <= 1);
    let ra = common::tree(&a.path().join("report"));
    let rb = common::tree(&b.path().join("report"));
    let identical = !ra.is_empty() && ra == rb;
    let took = started.elapsed();
    verdict(
        found && identical && took < Duration::from_secs(60),
        format!(
            "breakpoints {bps:?} (planted 20); report {} files byte-identical: {identical}; {:.1}s",
            ra.len(),
            took.as_secs_f64()
        ),
    )
}

fn event_association() -> Verdict {
    let epoch = NaiveDate::from_ymd_opt(2020, 1, 27).unwrap();
    let series = SentimentSeries {
        epoch,
        values: vec![0.0; 200],
        counts: vec![1; 200],
        interpolated: vec![false; 200],
        filter: "all".into(),
        degenerate: false,
    };
    let seg = Segmentation {
        breakpoints: vec![66],
        objective: 0.0,
    };
    let catalog = EventCatalog::parse(
        "date,label\n2020-04-03,CDC recommends cloth face coverings\n2020-04-05,edge of window\n2020-04-06,outside window\n2020-03-30,edge before window\n2020-03-29,before window\n",
    )
    .unwrap();
    let out = associate_events(&seg, &series, &catalog, 3);
    let b = &out[0];
    let offsets: Vec<(String, i64)> =
        b.events.iter().map(|e| (e.date.to_string(), e.offset_days)).collect();
    let want = vec![
        ("2020-03-30".to_string(), -3),
        ("2020-04-03".to_string(), 1),
        ("2020-04-05".to_string(), 3),
    ];
    let bundled = associate_events(&seg, &series, &EventCatalog::bundled(), 3);
    let bundled_ok = bundled[0]
        .events
        .iter()
        .any(|e| e.date.to_string() == "2020-04-03" && e.offset_days == 1);
    verdict(
        b.index == 66 && b.date.to_string() == "2020-04-02" && b.matched && offsets == want && bundled_ok,
        format!(
            "breakpoint 66 -> {} matched {offsets:?}; bundled catalog pairs CDC event: {bundled_ok}",
            b.date
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("pelt exactness vs exhaustive search", pelt_exactness),
        ("planted change recovery", planted_recovery),
        ("penalty monotonicity", penalty_monotonicity),
        ("sentiment algebra", sentiment_algebra),
        ("lda planted topics and count consistency", lda_planted),
        ("demographic rules", demographic_rules),
        ("college classifier and override", college_classifier),
        ("end-to-end fixture", end_to_end),
        ("event association", event_association),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

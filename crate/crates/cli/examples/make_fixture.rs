//! Regenerates the synthetic end-to-end fixture under `fixtures/`.
//!
//! 1,000 tweets over 40 days from 2020-01-27. Sentiment is mostly positive
//! on days 1-20 and mostly negative afterwards. The corpus also carries
//! non-English tweets, off-topic tweets and organization accounts so every
//! filter counter is exercised. Expected filter stats are tallied here
//! from the generator's own bookkeeping.
//!
//! Usage: `cargo run -p maskshift-cli --example make_fixture [-- OUT_DIR]`

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SEED: u64 = 0x6d61_736b;
const DAYS: usize = 40;
const TWEETS: usize = 1000;
const USERS: usize = 60;
/// Users 57..=60 are organizations.
const FIRST_ORG: usize = 57;
const MISSING_IDS: usize = 25;

const POSITIVE: &[&str] = &[
    "I love my new face mask, it feels great",
    "wearing a mask is a great idea, happy to help our neighbors",
    "so glad everyone here wears a mask #maskup",
    "the mask mandate is a good thing and I am proud of our town",
    "thank you nurses! a cloth mask is an easy way to keep people safe",
    "my mask matches my shirt today, love it 😊",
    "wear a mask and protect your family, it is the kind thing to do",
    "happy to see the store giving out free surgical mask packs",
];

const NEGATIVE: &[&str] = &[
    "I hate this mask mandate, it is terrible",
    "wearing a mask all day is awful and I am angry",
    "this face mask nonsense is stupid #nomask",
    "sick of the mask mandate, worst policy ever",
    "no more mask rules please, this is a disaster 😡",
    "the mask shortage is scary and the stores are a mess",
    "angry that the mask mandate keeps getting worse",
    "forced to wear a mask at work, horrible and unfair",
];

const NEUTRAL: &[&str] = &[
    "picked up a cloth mask at the store today",
    "the county posted an update about the mask mandate",
    "where do people buy an n95 mask around here",
];

const OFF_TOPIC: &[&str] = &[
    "beautiful weather at the park today",
    "the new coffee shop downtown is open",
    "watching the game tonight with friends",
    "finally finished painting the kitchen",
];

const SPANISH: &[&str] = &[
    "me encanta mi mascarilla nueva",
    "hoy hace mucho calor en la ciudad",
    "usen cubrebocas por favor",
];

const ORG: &[&str] = &[
    "Visit our store for a free face mask with every purchase https://t.co/deal",
    "Our clinic requires everyone to wear a mask during visits",
    "Update: mask mandate guidance for customers @citydesk",
];

const NAMES: &[&str] = &[
    "James Smith", "Maria Garcia", "Wei Zhang", "Priya Patel", "Kwame Mensah", "Anna Kowalski",
    "Giulia Rossi", "Lars Johansson", "Hans Mueller", "Emily Clark", "Carlos Hernandez",
    "Hiroshi Tanaka", "Rahul Sharma", "Ahmed Hassan", "Sarah Cohen", "Olga Ivanova",
    "Pierre Dubois", "John Williams", "Ana Lopez", "Min Park",
];

/// city, state, zip, county_fips, median_income, rucc
const CITIES: &[(&str, &str, &str, &str, u64, u8)] = &[
    ("Rochester", "NY", "14623", "36055", 70_100, 2),
    ("Springfield", "IL", "62701", "17167", 52_400, 3),
    ("Bozeman", "MT", "59715", "30031", 63_179, 5),
    ("Austin", "TX", "78701", "48453", 81_500, 1),
    ("Macon", "GA", "31201", "13021", 41_200, 4),
    ("Eugene", "OR", "97401", "41039", 55_000, 6),
];

const COLLEGE_TIMELINE: &[&str] = &[
    "my professor assigned so much reading",
    "studying late for my exam again",
    "my roommate left the dishes out",
    "heading to the library before class",
    "my dorm wifi is down",
];

const ADULT_TIMELINE: &[&str] = &[
    "picked up my kids from practice",
    "my boss moved the meeting again",
    "long day at my job",
    "my wife made dinner tonight",
    "mortgage payment due this week",
];

const FILLER: &[&str] = &[
    "nice sunset tonight",
    "coffee first then everything else",
    "traffic was bad this morning",
    "new episode tonight",
];

const POLITICS: &[&str] = &[
    "watching the senate hearing today",
    "the election is going to be close",
    "what did the president say this morning",
];

#[derive(Default)]
struct Stats {
    read: u64,
    kept: u64,
    dropped_language: u64,
    dropped_no_match: u64,
    dropped_deleted: u64,
    dropped_org: u64,
}

impl Stats {
    fn to_json(&self) -> String {
        let v = json!({
            "read": self.read,
            "kept": self.kept,
            "dropped_language": self.dropped_language,
            "dropped_no_match": self.dropped_no_match,
            "dropped_deleted": self.dropped_deleted,
            "dropped_org": self.dropped_org,
        });
        serde_json::to_string_pretty(&v).unwrap() + "\n"
    }
}

fn user(i: usize) -> String {
    format!("u{i:03}")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap_or_else(|e| panic!("{name}: {e}"));
}

/// Party evidence: 1..=15 follow the Republican candidate, 16..=30 the
/// Democratic one, 31..=35 both; politics talk for 1..=12, 16..=27, 31..=35.
fn follows(i: usize) -> Vec<&'static str> {
    match i {
        1..=15 => vec!["r1", "x9"],
        16..=30 => vec!["d1"],
        31..=35 => vec!["d2", "r2"],
        _ => vec!["x9"],
    }
}

fn talks_politics(i: usize) -> bool {
    matches!(i, 1..=12 | 16..=27 | 31..=35)
}

/// Labeled users 1..=40; every third is a student.
fn college_label(i: usize) -> Option<bool> {
    (i <= 40).then_some(i % 3 == 0)
}

fn main() {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let epoch = chrono::NaiveDate::from_ymd_opt(2020, 1, 27).unwrap();

    let mut corpus = String::new();
    let mut ids = Vec::new();
    let mut stats = Stats::default();
    for n in 0..TWEETS {
        let day = n % DAYS;
        let id = format!("t{:05}", n + 1);
        let secs = rng.gen_range(0..86_400u32);
        let created = epoch.and_hms_opt(0, 0, 0).unwrap() + chrono::Duration::seconds(secs.into())
            + chrono::Duration::days(day as i64);
        let roll: f64 = rng.gen();
        let (author, text, lang) = if roll < 0.08 {
            stats.dropped_language += 1;
            let a = rng.gen_range(1..=USERS);
            (a, SPANISH.choose(&mut rng).unwrap().to_string(), "es")
        } else if roll < 0.16 {
            stats.dropped_no_match += 1;
            let a = rng.gen_range(1..FIRST_ORG);
            (a, OFF_TOPIC.choose(&mut rng).unwrap().to_string(), "en")
        } else if roll < 0.22 {
            stats.dropped_org += 1;
            let a = rng.gen_range(FIRST_ORG..=USERS);
            (a, ORG.choose(&mut rng).unwrap().to_string(), "en")
        } else {
            stats.kept += 1;
            let a = rng.gen_range(1..FIRST_ORG);
            let mood: f64 = rng.gen();
            let pool = if mood < 0.1 {
                NEUTRAL
            } else if (day < 20) == (mood < 0.9) {
                POSITIVE
            } else {
                NEGATIVE
            };
            let mut t = pool.choose(&mut rng).unwrap().to_string();
            if rng.gen_bool(0.15) {
                t.push_str(" https://t.co/x1y2");
            }
            if rng.gen_bool(0.1) {
                t = format!("@neighbor {t}");
            }
            let lang = if rng.gen_bool(0.05) { "en-US" } else { "en" };
            (a, t, lang)
        };
        stats.read += 1;
        let line = json!({
            "id": id,
            "created_at": created.and_utc().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "author_id": user(author),
            "full_text": text,
            "lang": lang,
        });
        writeln!(corpus, "{line}").unwrap();
        ids.push(id);
    }
    write(&dir, "corpus.jsonl", &corpus);
    write(&dir, "expected_stats.json", &stats.to_json());

    // hydration ids: every corpus id plus ids that no longer resolve
    let mut hydrate_ids = String::new();
    for (i, id) in ids.iter().enumerate() {
        writeln!(hydrate_ids, "{id}").unwrap();
        if i % 40 == 0 && i / 40 < MISSING_IDS {
            writeln!(hydrate_ids, "t9{:04}", i / 40).unwrap();
            stats.dropped_deleted += 1;
            stats.read += 1;
        }
    }
    write(&dir, "hydrate_ids.txt", &hydrate_ids);
    write(&dir, "expected_stats_hydrate.json", &stats.to_json());

    let mut users = String::new();
    let mut annotations = String::from("author_id,age_bucket,gender,org_probability\n");
    let mut timelines = String::new();
    let mut labels = String::from("author_id,is_college\n");
    let ages = ["<=18", "19-29", "30-39", ">=40"];
    for i in 1..=USERS {
        let id = user(i);
        let org = i >= FIRST_ORG;
        let location = match i % 8 {
            6 => Some("Earth".to_string()),
            7 => None,
            k => CITIES.get(k).map(|c| format!("{}, {}", c.0, c.1)),
        };
        let display = if org {
            format!("City Health {i}")
        } else {
            NAMES[i % NAMES.len()].to_string()
        };
        writeln!(
            users,
            "{}",
            json!({
                "author_id": id,
                "display_name": display,
                "location": location,
                "following": follows(i),
            })
        )
        .unwrap();
        let (age, gender) = if i % 11 == 0 {
            ("unknown", "unknown")
        } else {
            (ages[i % 4], if i % 2 == 0 { "female" } else { "male" })
        };
        let org_p = if org { 0.92 } else { 0.05 };
        writeln!(annotations, "{id},{age},{gender},{org_p}").unwrap();

        let student = college_label(i).unwrap_or(i % 3 == 0);
        let mut tweets: Vec<String> = (0..6)
            .map(|_| {
                let pool = if student { COLLEGE_TIMELINE } else { ADULT_TIMELINE };
                pool.choose(&mut rng).unwrap().to_string()
            })
            .collect();
        tweets.extend((0..3).map(|_| FILLER.choose(&mut rng).unwrap().to_string()));
        if talks_politics(i) {
            tweets.push(POLITICS.choose(&mut rng).unwrap().to_string());
        }
        if i == 41 {
            // override case: an unlabeled adult who keeps mentioning a professor
            tweets.extend((0..5).map(|k| format!("the professor on tv said thing {k}")));
        }
        writeln!(timelines, "{}", json!({ "author_id": id, "tweets": tweets })).unwrap();
        if let Some(c) = college_label(i) {
            writeln!(labels, "{id},{c}").unwrap();
        }
    }
    write(&dir, "users.jsonl", &users);
    write(&dir, "annotations.csv", &annotations);
    write(&dir, "timelines.jsonl", &timelines);
    write(&dir, "college_labels.csv", &labels);

    let mut cities = String::from("city,state,zip,county_fips\n");
    let mut incomes = String::from("zip,median_income\n");
    let mut rucc = String::from("county_fips,state,rucc_code\n");
    for (city, state, zip, fips, income, code) in CITIES {
        writeln!(cities, "{city},{state},{zip},{fips}").unwrap();
        writeln!(incomes, "{zip},{income}").unwrap();
        writeln!(rucc, "{fips},{state},{code}").unwrap();
    }
    write(&dir, "geo_cities.csv", &cities);
    write(&dir, "geo_incomes.csv", &incomes);
    write(&dir, "geo_rucc.csv", &rucc);
    write(
        &dir,
        "party_accounts.csv",
        "account_id,party\nd1,Democrat\nd2,Democrat\nr1,Republican\nr2,Republican\n",
    );

    let paths = r#"[paths]
corpus = "corpus.jsonl"
annotations = "annotations.csv"
users = "users.jsonl"
timelines = "timelines.jsonl"
college_labels = "college_labels.csv"
geo_cities = "geo_cities.csv"
geo_incomes = "geo_incomes.csv"
geo_rucc = "geo_rucc.csv"
party_accounts = "party_accounts.csv"
"#;
    let stages = r#"
[demographics]
n_trees = 25
college_vocabulary = 8

[topics]
candidates = [2, 3, 4]
iterations = 150

[series]
end = "2020-03-06"
filters = ["all", "party=Republican", "party=Democrat", "gender=female", "is_college=true", "metro_class=Metro"]
"#;
    write(
        &dir,
        "maskshift.toml",
        &format!("# End-to-end fixture pipeline.\nseed = 20200127\nout = \"out\"\n\n{paths}{stages}"),
    );
    write(
        &dir,
        "maskshift_hydrate.toml",
        &format!(
            "# Same pipeline, corpus rebuilt by hydrating stored ids.\nseed = 20200127\nout = \"out_hydrate\"\n\n{}\n[hydrate]\nids = \"hydrate_ids.txt\"\nbackend = \"fixture\"\nfixture = \"corpus.jsonl\"\nattempts = 1\ninitial_backoff_ms = 0\n{stages}",
            paths.replace("corpus = \"corpus.jsonl\"\n", "")
        ),
    );
    println!("wrote fixture to {}", dir.display());
}

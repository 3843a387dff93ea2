#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const STAGES: [&str; 7] = ["filter", "score", "demo", "topics", "series", "detect", "report"];

pub fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture_config() -> PathBuf {
    repo().join("fixtures/maskshift.toml")
}

pub fn maskshift(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskshift"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("spawn maskshift")
}

pub fn stage(config: &Path, out: &Path, name: &str) {
    let o = maskshift(config, out, &[name]);
    assert!(
        o.status.success(),
        "maskshift {name} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

pub fn run_all(config: &Path, out: &Path) {
    for s in STAGES {
        stage(config, out, s);
    }
}

/// Relative path → bytes for every file under `dir`.
pub fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

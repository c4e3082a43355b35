use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetBundle, DatasetError, Document, TestItem};
use crate::hashing::sha256_hex;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

const TRAIN: &str = "train.jsonl";
const CONFIG: &str = "config.json";
const MANIFEST: &str = "manifest.json";
const TESTS: &str = "tests";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub family: String,
    pub seed: u64,
    pub config_hash: String,
    /// Relative path → SHA-256 of the file bytes.
    pub files: BTreeMap<String, String>,
    pub prompt_templates: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> DatasetError {
    DatasetError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub(crate) fn jsonl<T: Serialize>(rows: &[T]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("rows serialize") + "\n")
        .collect()
}

fn write(dir: &Path, rel: &str, contents: &str, files: &mut BTreeMap<String, String>) -> Result<(), DatasetError> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    files.insert(rel.to_string(), sha256_hex(contents.as_bytes()));
    Ok(())
}

pub(crate) fn config_json(bundle: &DatasetBundle) -> String {
    let value = serde_json::json!({ "family": bundle.family, "seed": bundle.seed, "params": bundle.config });
    serde_json::to_string_pretty(&value).expect("config serializes") + "\n"
}

/// Writes the bundle under `dir`, replacing any previous test splits, and
/// returns the manifest that was written alongside.
pub fn write_bundle(bundle: &DatasetBundle, dir: &Path) -> Result<Manifest, DatasetError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let tests_dir = dir.join(TESTS);
    if tests_dir.exists() {
        fs::remove_dir_all(&tests_dir).map_err(|e| io_err(&tests_dir, e))?;
    }
    let mut files = BTreeMap::new();
    write(dir, TRAIN, &jsonl(&bundle.train), &mut files)?;
    for (split, items) in &bundle.tests {
        write(dir, &format!("{TESTS}/{split}.jsonl"), &jsonl(items), &mut files)?;
    }
    let config = config_json(bundle);
    write(dir, CONFIG, &config, &mut files)?;
    for (name, contents) in &bundle.extras {
        write(dir, name, contents, &mut files)?;
    }
    let manifest = Manifest {
        tool_version: TOOL_VERSION.to_string(),
        family: bundle.family.clone(),
        seed: bundle.seed,
        config_hash: sha256_hex(config.as_bytes()),
        files,
        prompt_templates: crate::transform::prompts::template_hashes(),
    };
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest.to_json()).map_err(|e| io_err(&path, e))?;
    Ok(manifest)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| io_err(path, format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn read_bundle(dir: &Path) -> Result<DatasetBundle, DatasetError> {
    let config_path = dir.join(CONFIG);
    let config_text = fs::read_to_string(&config_path).map_err(|e| io_err(&config_path, e))?;
    let config: serde_json::Value = serde_json::from_str(&config_text).map_err(|e| io_err(&config_path, e))?;
    let family = config["family"].as_str().ok_or_else(|| io_err(&config_path, "missing `family`"))?;
    let seed = config["seed"].as_u64().ok_or_else(|| io_err(&config_path, "missing `seed`"))?;
    let mut bundle = DatasetBundle::new(family, seed, config["params"].clone());
    bundle.train = read_jsonl::<Document>(&dir.join(TRAIN))?;

    let tests_dir = dir.join(TESTS);
    if tests_dir.is_dir() {
        let entries = fs::read_dir(&tests_dir).map_err(|e| io_err(&tests_dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| io_err(&tests_dir, e))?.path();
            if let Some(split) = path.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_suffix(".jsonl")) {
                bundle.tests.insert(split.to_string(), read_jsonl::<TestItem>(&path)?);
            }
        }
    }

    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let known = [TRAIN, CONFIG, MANIFEST].contains(&name);
        if path.is_file() && !known && (name.ends_with(".json") || name.ends_with(".jsonl")) {
            bundle.extras.insert(name.to_string(), fs::read_to_string(&path).map_err(|e| io_err(&path, e))?);
        }
    }
    Ok(bundle)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, DatasetError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DatasetBundle {
        let mut b = DatasetBundle::new("toy", 7, serde_json::json!({"n": 1}));
        b.train.push(Document::new("train-0", vec!["glon are big.".into()], "plain"));
        b.tests.insert(
            "reversals".into(),
            vec![TestItem {
                question: "Q:".into(),
                candidates: vec!["a".into(), "b".into()],
                correct_index: 1,
                subset_label: "x".into(),
            }],
        );
        b.extras.insert("lexicon.json".into(), "{}\n".into());
        b
    }

    #[test]
    fn round_trip_and_stable_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m1 = write_bundle(&sample(), dir.path()).unwrap();
        assert_eq!(read_bundle(dir.path()).unwrap(), sample());
        let m2 = write_bundle(&sample(), dir.path()).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(read_manifest(dir.path()).unwrap(), m1);
        assert!(m1.files.contains_key("tests/reversals.jsonl"));
        assert_eq!(m1.prompt_templates.len(), 3);
    }

    #[test]
    fn stale_splits_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&sample(), dir.path()).unwrap();
        let mut smaller = sample();
        smaller.tests.clear();
        write_bundle(&smaller, dir.path()).unwrap();
        assert!(read_bundle(dir.path()).unwrap().tests.is_empty());
    }
}

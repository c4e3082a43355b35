mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use common::model_entails;
use proptest::prelude::*;
use synthbench::datasets::{
    gen_celebrity_reversal, gen_simple_reversals, gen_simple_syllogisms, write_bundle, CelebrityConfig, DatasetBundle,
    ReversalConfig, SyllogismItem,
};
use synthbench::pipeline::{generate, GenConfig, GenFamily};

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn written(bundle: &DatasetBundle) -> BTreeMap<String, Vec<u8>> {
    let tmp = tempfile::tempdir().unwrap();
    write_bundle(bundle, tmp.path()).unwrap();
    files(tmp.path())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn same_seed_same_bytes(seed in any::<u64>()) {
        let cfg = ReversalConfig { n_comparisons: 40, ..ReversalConfig::default() };
        prop_assert_eq!(written(&gen_simple_reversals(&cfg, seed).unwrap()), written(&gen_simple_reversals(&cfg, seed).unwrap()));
        prop_assert_eq!(written(&gen_simple_syllogisms(12, seed).unwrap()), written(&gen_simple_syllogisms(12, seed).unwrap()));
        let cel = CelebrityConfig { n_train: 300, ..CelebrityConfig::default() };
        prop_assert_eq!(written(&gen_celebrity_reversal(&cel, seed).unwrap()), written(&gen_celebrity_reversal(&cel, seed).unwrap()));
    }

    #[test]
    fn reversal_and_syllogism_candidates_never_appear_in_train(seed in any::<u64>()) {
        let cfg = ReversalConfig { n_comparisons: 60, ..ReversalConfig::default() };
        for bundle in [gen_simple_reversals(&cfg, seed).unwrap(), gen_simple_syllogisms(20, seed).unwrap()] {
            let train: Vec<String> = bundle.train.iter().map(|d| d.text()).collect();
            for c in bundle.tests.values().flatten().flat_map(|t| &t.candidates) {
                prop_assert!(!train.iter().any(|t| t.contains(c.as_str())), "`{}` leaks into train", c);
            }
        }
    }
}

#[test]
fn semantic_holdout_candidates_never_appear_in_train() {
    let bundle = generate(GenFamily::Semantic, &GenConfig::default(), 3).unwrap();
    let train: Vec<String> = bundle.train.iter().map(|d| d.text()).collect();
    let holdouts = &bundle.tests["holdouts"];
    assert!(!holdouts.is_empty());
    for c in holdouts.iter().flat_map(|t| &t.candidates) {
        assert!(!train.iter().any(|t| t.contains(c.as_str())), "`{c}` leaks into train");
    }
}

#[test]
fn syllogism_test_items_have_one_entailed_candidate() {
    let bundle = gen_simple_syllogisms(69, 11).unwrap();
    let items: Vec<SyllogismItem> =
        bundle.extras["syllogisms.jsonl"].lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let tests = &bundle.tests["syllogisms"];
    assert_eq!(items.len(), tests.len());
    for (item, test) in items.iter().zip(tests) {
        let entailed: Vec<usize> =
            (0..6).filter(|&i| model_entails(&item.premises, &item.candidates[i], 4)).collect();
        assert_eq!(entailed, vec![test.correct_index]);
    }
}

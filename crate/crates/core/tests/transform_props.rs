use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;
use synthbench::datasets::Document;
use synthbench::kg::PatternRewriter;
use synthbench::lm_client::{Client, MemoryMock, Rewriter};
use synthbench::transform::{
    augment_corpus, split_cumulative, split_independent, split_sentences, AugmentConfig, Strategy as Aug,
};

const NAMES: [&str; 5] = ["zorps", "blims", "daxes", "wugs", "feps"];

fn sentence() -> impl Strategy<Value = String> {
    (0..5usize, 1..5usize, any::<bool>()).prop_map(|(a, off, tall)| {
        let b = (a + off) % 5;
        let rel = if tall { "taller" } else { "shorter" };
        format!("{} are {rel} than {}.", NAMES[a], NAMES[b])
    })
}

fn corpus() -> impl Strategy<Value = Vec<Document>> {
    prop::collection::vec(prop::collection::vec(sentence(), 1..5), 1..8).prop_map(|docs| {
        docs.into_iter().enumerate().map(|(i, s)| Document::new(format!("d{i}"), s, "test")).collect()
    })
}

fn strategy() -> impl Strategy<Value = Aug> {
    prop::sample::select(vec![Aug::Local, Aug::Document, Aug::Global])
}

fn client() -> Client {
    let rw: Arc<dyn Rewriter> = Arc::new(PatternRewriter::new([
        ("{A} are taller than {B}", "{B} are shorter than {A}"),
    ]));
    Client::new(Arc::new(MemoryMock::empty(Some(rw))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn both_split_modes_reconstruct_the_document(sentences in prop::collection::vec(sentence(), 1..12)) {
        let doc = Document::new("d", sentences.clone(), "test");
        let ind = split_independent(&doc).unwrap();
        let cum = split_cumulative(&doc).unwrap();
        prop_assert_eq!(ind.iter().map(|e| e.target.clone()).collect::<Vec<_>>().join(" "), doc.text());
        let last = cum.last().unwrap();
        let whole = if last.context.is_empty() { last.target.clone() } else { format!("{} {}", last.context, last.target) };
        prop_assert_eq!(whole, doc.text());
        prop_assert_eq!(split_sentences(&doc.text()), sentences);
    }

    #[test]
    fn augmentation_appends_unique_attributed_statements(docs in corpus(), strategy in strategy()) {
        let config = AugmentConfig { subsample_factor: 2, concurrency: 2, ..AugmentConfig::default() };
        let out = augment_corpus(&docs, strategy, &client(), &config).unwrap();
        prop_assert_eq!(&out.docs[..docs.len()], &docs[..]);
        prop_assert_eq!(out.added, out.docs.len() - docs.len());

        let mut seen: HashSet<String> = docs.iter().flat_map(|d| d.sentences.iter().cloned().chain([d.text()])).collect();
        let ids: HashSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
        for d in &out.docs[docs.len()..] {
            prop_assert!(seen.insert(d.text()), "duplicate survived: {}", d.text());
            let p = d.provenance.as_ref().expect("augmented documents carry provenance");
            prop_assert_eq!(p.strategy, strategy);
            prop_assert_eq!(p.prompt_hash.len(), 64);
            prop_assert!(p.prompt_hash.chars().all(|c| c.is_ascii_hexdigit()));
            prop_assert!(ids.contains(p.target_id.as_str()));
            prop_assert_eq!(p.sentence_index.is_some(), strategy == Aug::Local);
            prop_assert_eq!(!p.context_ids.is_empty(), strategy == Aug::Global);
        }
    }
}

#[test]
fn augmentation_adds_reversals_and_drops_known_ones() {
    let docs = vec![
        Document::new("a", vec!["zorps are taller than blims.".into(), "wugs are taller than feps.".into()], "test"),
        Document::new("b", vec!["blims are shorter than zorps.".into()], "test"),
    ];
    let out = augment_corpus(&docs, Aug::Local, &client(), &AugmentConfig::default()).unwrap();
    assert_eq!(out.added, 1);
    assert_eq!(out.docs[2].text(), "feps are shorter than wugs.");
    assert_eq!(out.duplicates_dropped, 2);
}

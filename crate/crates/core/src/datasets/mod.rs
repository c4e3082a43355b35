//! Benchmark generators and the on-disk bundle format.

mod bundle;
pub mod celebrity;
pub mod reversals;
pub mod semantic;
pub mod syllogisms;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub(crate) use bundle::jsonl as bundle_jsonl;
pub use bundle::{read_bundle, read_manifest, write_bundle, Manifest, TOOL_VERSION};
pub use celebrity::{apply_name_map, gen_celebrity_reversal, name_lexicon, nonsensify_names, CelebrityConfig, NameMap};
pub use reversals::{gen_simple_reversals, reversal_rewriter, ReversalConfig, COMPARATORS, PREAMBLES};
pub use semantic::{
    default_holdouts, gen_semantic_corpus, select_distractors, DistractorPool, SemanticConfig, SemanticCorpus,
    StructuredItem,
};
pub use syllogisms::{gen_simple_syllogisms, gen_syllogism_items, SyllogismItem};

use crate::kg::KgError;
use crate::lexicon::LexiconError;
use crate::transform::Provenance;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("generator exhausted: {0}")]
    GeneratorExhausted(String),
    #[error("coverage violation: {0}")]
    CoverageViolation(String),
    #[error("only {found} eligible distractors for `{statement}`, need {needed}")]
    InsufficientDistractors { statement: String, found: usize, needed: usize },
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// A training text unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<String>,
    pub style_tag: String,
    /// Indices into the generating KB's fact list. Not serialized.
    #[serde(skip)]
    pub source_facts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Document {
    pub fn new(id: impl Into<String>, sentences: Vec<String>, style_tag: impl Into<String>) -> Self {
        Self { id: id.into(), sentences, style_tag: style_tag.into(), source_facts: Vec::new(), provenance: None }
    }

    /// Sentences joined by single spaces.
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestItem {
    pub question: String,
    pub candidates: Vec<String>,
    pub correct_index: usize,
    pub subset_label: String,
}

/// Train corpus, named test splits and the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub family: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub train: Vec<Document>,
    pub tests: BTreeMap<String, Vec<TestItem>>,
    /// Additional files written verbatim next to the corpus.
    pub extras: BTreeMap<String, String>,
}

impl DatasetBundle {
    pub fn new(family: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            family: family.to_string(),
            seed,
            config,
            train: Vec::new(),
            tests: BTreeMap::new(),
            extras: BTreeMap::new(),
        }
    }

    pub fn test_count(&self) -> usize {
        self.tests.values().map(Vec::len).sum()
    }
}

/// Whether `phrase` occurs in `text` with no letter or digit directly
/// before or after it.
pub fn contains_phrase(text: &str, phrase: &str) -> bool {
    if phrase.is_empty() {
        return false;
    }
    let mut from = 0;
    while let Some(pos) = text[from..].find(phrase) {
        let start = from + pos;
        let end = start + phrase.len();
        let before_ok = text[..start].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
        let after_ok = text[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return true;
        }
        from = start + phrase.chars().next().map_or(1, char::len_utf8);
    }
    false
}

/// Places `correct` among `distractors` at a random position.
pub(crate) fn shuffle_in(
    correct: String,
    distractors: Vec<String>,
    rng: &mut crate::rng::Rng,
) -> (Vec<String>, usize) {
    use rand::Rng as _;
    let mut candidates = distractors;
    let at = rng.gen_range(0..=candidates.len());
    candidates.insert(at, correct);
    (candidates, at)
}

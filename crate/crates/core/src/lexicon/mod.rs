//! Nonsense-word lexicon.
//!
//! Words are assembled from a fixed phoneme inventory following letter-level
//! syllable patterns (`CVCC`, `CCVCC`, ...), then bound injectively to the
//! real-world terms they replace. Candidates that collide with a bundled
//! English wordlist, with an input term or with a reserved word are rejected.

mod inventory;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use inventory::{PhonemeInventory, Slot};

use crate::rng::Rng;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("duplicate term `{0}`")]
    DuplicateTerm(String),
    #[error("inventory can supply at most {capacity} distinct words, {requested} requested")]
    CapacityExhausted { requested: usize, capacity: usize },
    #[error("invalid phoneme inventory: {0}")]
    InvalidInventory(String),
}

const ENGLISH_WORDS: &str = include_str!("../../data/english_10k.txt");

/// The bundled 10k most frequent lowercase English words.
pub fn english_wordlist() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| ENGLISH_WORDS.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

/// Draws one word: a uniformly chosen pattern, each slot filled uniformly
/// from the inventory entries of the slot's length.
pub fn generate_word(inventory: &PhonemeInventory, rng: &mut Rng) -> String {
    let patterns = inventory.compiled_patterns();
    let pattern = patterns
        .choose(rng)
        .expect("validated inventory has at least one pattern");
    let mut word = String::with_capacity(5);
    for slot in pattern {
        let pool = inventory.pool(*slot);
        word.push_str(pool.choose(rng).expect("validated inventory fills every slot"));
    }
    word
}

/// Injective term -> nonsense word mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub entries: BTreeMap<String, String>,
    pub seed: u64,
}

impl Lexicon {
    pub fn get(&self, term: &str) -> Option<&str> {
        self.entries.get(term).map(String::as_str)
    }

    /// Looks up a term that is known to be present.
    pub fn word(&self, term: &str) -> &str {
        self.get(term).unwrap_or_else(|| panic!("term `{term}` missing from lexicon"))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn inverse(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, v)| (v.clone(), k.clone())).collect()
    }

    /// Canonical JSON: keys sorted, UTF-8, no trailing newline.
    pub fn to_json(&self) -> String {
        serde_json::to_value(self)
            .and_then(|v| serde_json::to_string_pretty(&v))
            .expect("lexicon serialises")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

pub fn build_lexicon(
    terms: &[String],
    inventory: &PhonemeInventory,
    seed: u64,
) -> Result<Lexicon, LexiconError> {
    build_lexicon_avoiding(terms, inventory, seed, &BTreeSet::new())
}

/// As [`build_lexicon`], additionally rejecting every word in `reserved`.
pub fn build_lexicon_avoiding(
    terms: &[String],
    inventory: &PhonemeInventory,
    seed: u64,
    reserved: &BTreeSet<String>,
) -> Result<Lexicon, LexiconError> {
    inventory.validate()?;
    let mut seen = HashSet::with_capacity(terms.len());
    for term in terms {
        if !seen.insert(term.as_str()) {
            return Err(LexiconError::DuplicateTerm(term.clone()));
        }
    }

    let english = english_wordlist();
    let admissible = |w: &str| !english.contains(w) && !seen.contains(w) && !reserved.contains(w);
    let capacity = inventory.enumerate().into_iter().filter(|w| admissible(w)).count();
    if terms.len() > capacity {
        return Err(LexiconError::CapacityExhausted { requested: terms.len(), capacity });
    }

    let mut rng = crate::rng::stream(seed, "lexicon");
    let mut used = HashSet::with_capacity(terms.len());
    let mut entries = BTreeMap::new();
    // Rejection sampling; the enumerated capacity bounds how hard this can get.
    let max_attempts = 64 * capacity.max(1);
    for term in terms {
        let mut attempts = 0usize;
        let word = loop {
            attempts += 1;
            if attempts > max_attempts {
                return Err(LexiconError::CapacityExhausted { requested: terms.len(), capacity: used.len() });
            }
            let candidate = generate_word(inventory, &mut rng);
            if admissible(&candidate) && !used.contains(&candidate) {
                break candidate;
            }
        };
        used.insert(word.clone());
        entries.insert(term.clone(), word);
    }
    Ok(Lexicon { entries, seed })
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::LexiconError;

/// One position in a compiled syllable pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Onset(usize),
    Vowel(usize),
    Coda(usize),
}

/// Phoneme material and the letter-level shapes it may be combined into.
///
/// A pattern such as `CCVCC` is read as runs: a consonant run before a vowel
/// is an onset, a vowel run is a vowel, and the final consonant run is a
/// coda. Run lengths select inventory entries of that many letters, so the
/// pattern length is exactly the word length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhonemeInventory {
    pub consonant_onsets: Vec<String>,
    pub vowels: Vec<String>,
    pub codas: Vec<String>,
    pub syllable_patterns: Vec<String>,
}

fn owned(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl Default for PhonemeInventory {
    fn default() -> Self {
        Self {
            consonant_onsets: owned(&[
                "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "y",
                "z", "bl", "br", "cl", "cr", "dr", "fl", "fr", "gl", "gr", "pl", "pr", "sk", "sl", "sm",
                "sn", "sp", "st", "sw", "tr", "tw", "zw",
            ]),
            vowels: owned(&["a", "e", "i", "o", "u", "ai", "ea", "ee", "oo", "ou", "oa", "ie"]),
            codas: owned(&[
                "b", "d", "f", "g", "k", "l", "m", "n", "p", "t", "x", "ff", "ll", "mp", "nd", "nk",
                "nt", "sk", "st", "ft", "lk", "ds", "ps", "rn", "rk",
            ]),
            syllable_patterns: owned(&["CVCC", "CCVC", "CVVC", "CCVCC", "CVCVC", "CCVVC"]),
        }
    }
}

impl PhonemeInventory {
    pub fn validate(&self) -> Result<(), LexiconError> {
        let lists = [&self.consonant_onsets, &self.vowels, &self.codas];
        for entry in lists.iter().flat_map(|l| l.iter()) {
            if entry.is_empty() || !entry.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(LexiconError::InvalidInventory(format!("bad entry `{entry}`")));
            }
        }
        if self.syllable_patterns.is_empty() {
            return Err(LexiconError::InvalidInventory("no syllable patterns".into()));
        }
        for pattern in &self.syllable_patterns {
            if !matches!(pattern.len(), 4 | 5) {
                return Err(LexiconError::InvalidInventory(format!("pattern `{pattern}` is not 4-5 letters")));
            }
            let slots = compile(pattern)
                .ok_or_else(|| LexiconError::InvalidInventory(format!("malformed pattern `{pattern}`")))?;
            if let Some(slot) = slots.iter().find(|s| self.pool(**s).is_empty()) {
                return Err(LexiconError::InvalidInventory(format!("pattern `{pattern}` needs {slot:?}")));
            }
        }
        Ok(())
    }

    pub fn compiled_patterns(&self) -> Vec<Vec<Slot>> {
        self.syllable_patterns.iter().filter_map(|p| compile(p)).collect()
    }

    /// Inventory entries usable in `slot`.
    pub fn pool(&self, slot: Slot) -> Vec<&str> {
        let (list, len) = match slot {
            Slot::Onset(n) => (&self.consonant_onsets, n),
            Slot::Vowel(n) => (&self.vowels, n),
            Slot::Coda(n) => (&self.codas, n),
        };
        list.iter().filter(|e| e.len() == len).map(String::as_str).collect()
    }

    /// Every distinct word the inventory can produce.
    pub fn enumerate(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for pattern in self.compiled_patterns() {
            let mut partial = vec![String::new()];
            for slot in pattern {
                let pool = self.pool(slot);
                partial = partial
                    .iter()
                    .flat_map(|prefix| pool.iter().map(move |p| format!("{prefix}{p}")))
                    .collect();
            }
            out.extend(partial);
        }
        out
    }

    pub fn capacity(&self) -> usize {
        self.enumerate().len()
    }

    /// Whether `word` can be split according to one of the patterns.
    pub fn conforms(&self, word: &str) -> bool {
        self.compiled_patterns().iter().any(|slots| self.matches(word, slots))
    }

    fn matches(&self, word: &str, slots: &[Slot]) -> bool {
        let Some((first, rest)) = slots.split_first() else {
            return word.is_empty();
        };
        self.pool(*first)
            .into_iter()
            .any(|p| word.strip_prefix(p).is_some_and(|tail| self.matches(tail, rest)))
    }
}

fn compile(pattern: &str) -> Option<Vec<Slot>> {
    let bytes = pattern.as_bytes();
    if bytes.is_empty() || !bytes.iter().all(|b| matches!(b, b'C' | b'V')) || !bytes.contains(&b'V') {
        return None;
    }
    let mut runs: Vec<(u8, usize)> = Vec::new();
    for &b in bytes {
        match runs.last_mut() {
            Some((kind, n)) if *kind == b => *n += 1,
            _ => runs.push((b, 1)),
        }
    }
    let last = runs.len() - 1;
    Some(
        runs.iter()
            .enumerate()
            .map(|(i, &(kind, n))| match kind {
                b'V' => Slot::Vowel(n),
                _ if i == last => Slot::Coda(n),
                _ => Slot::Onset(n),
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns_compile_to_runs() {
        assert_eq!(compile("CCVCC"), Some(vec![Slot::Onset(2), Slot::Vowel(1), Slot::Coda(2)]));
        assert_eq!(
            compile("CVCVC"),
            Some(vec![Slot::Onset(1), Slot::Vowel(1), Slot::Onset(1), Slot::Vowel(1), Slot::Coda(1)])
        );
        assert_eq!(compile("CXC"), None);
    }

    #[test]
    fn default_inventory_is_valid_with_ample_capacity() {
        let inv = PhonemeInventory::default();
        inv.validate().unwrap();
        // brute-force enumeration; every word is 4 or 5 letters
        let words = inv.enumerate();
        assert!(words.iter().all(|w| matches!(w.len(), 4 | 5)));
        assert!(words.len() >= 10_000, "capacity {}", words.len());
    }

    #[test]
    fn rejects_long_patterns() {
        let inv = PhonemeInventory { syllable_patterns: vec!["CCVVCC".into()], ..Default::default() };
        assert!(inv.validate().is_err());
    }
}

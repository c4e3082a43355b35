use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use super::{Backend, CompletionRequest, LmError, Rewriter, ScoreRequest, ScoredCompletion};
use crate::hashing::{sha256_hex, unit_interval};
use crate::transform::split_sentences;

/// Lowercases, turns punctuation into spaces and collapses whitespace.
/// Hyphens and apostrophes stay inside words.
pub fn normalize_text(text: &str) -> String {
    let mapped: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '\'' { c.to_ascii_lowercase() } else { ' ' })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Scores every continuation at -1 nat per character; completions come
/// from a fixture table keyed by prompt.
#[derive(Debug, Clone, Default)]
pub struct CharMock {
    pub fixtures: BTreeMap<String, String>,
    /// Answer unknown prompts with the request's `target_text` metadata.
    pub echo_target: bool,
}

impl CharMock {
    pub fn with_fixture(mut self, prompt: impl Into<String>, text: impl Into<String>) -> Self {
        self.fixtures.insert(prompt.into(), text.into());
        self
    }
}

impl Backend for CharMock {
    fn id(&self) -> String {
        let fixtures = serde_json::to_string(&self.fixtures).expect("string maps serialize");
        format!("mock-char-{}-{}", &sha256_hex(fixtures.as_bytes())[..12], self.echo_target)
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, LmError> {
        if let Some(text) = self.fixtures.get(&req.prompt) {
            return Ok(text.clone());
        }
        Ok(match req.metadata.get("target_text") {
            Some(t) if self.echo_target => t.clone(),
            _ => String::new(),
        })
    }

    fn score(&self, req: &ScoreRequest) -> Result<ScoredCompletion, LmError> {
        let n = req.continuation.chars().count();
        Ok(ScoredCompletion { total_logprob: -(n as f64), token_count: n.max(1) as u32 })
    }
}

/// A stand-in for a model that has memorised a training corpus.
///
/// A continuation is "known" when it appears verbatim in the memorised
/// corpus, or when it or one of its rewrites appears in the prompt. Known
/// continuations score about -0.1 per word; unknown ones score between
/// -2 and -3 per word, with the exact value a hash of prompt and
/// continuation. Facts only seen in one direction are therefore not
/// recognised in the other without context, while context lets the
/// rewriter bridge the gap.
pub struct MemoryMock {
    memory: String,
    memory_hash: String,
    rewriter: Option<Arc<dyn Rewriter>>,
    pub fixtures: BTreeMap<String, String>,
    last_prompt: Mutex<Option<(String, Arc<String>)>>,
}

impl std::fmt::Debug for MemoryMock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MemoryMock").field("memory_hash", &self.memory_hash).finish_non_exhaustive()
    }
}

impl MemoryMock {
    pub fn new<S: AsRef<str>>(corpus: impl IntoIterator<Item = S>, rewriter: Option<Arc<dyn Rewriter>>) -> Self {
        let sentences: Vec<String> = corpus
            .into_iter()
            .flat_map(|doc| split_sentences(doc.as_ref()))
            .map(|s| normalize_text(&s))
            .filter(|s| !s.is_empty())
            .collect();
        let memory = format!("| {} |", sentences.join(" | "));
        let memory_hash = sha256_hex(memory.as_bytes());
        Self { memory, memory_hash, rewriter, fixtures: BTreeMap::new(), last_prompt: Mutex::new(None) }
    }

    /// A mock with nothing memorised.
    pub fn empty(rewriter: Option<Arc<dyn Rewriter>>) -> Self {
        Self::new(std::iter::empty::<&str>(), rewriter)
    }

    fn normalized_prompt(&self, prompt: &str) -> Arc<String> {
        let mut last = self.last_prompt.lock().unwrap();
        if let Some((raw, norm)) = last.as_ref() {
            if raw == prompt {
                return norm.clone();
            }
        }
        let norm = Arc::new(format!(" {} ", normalize_text(prompt)));
        *last = Some((prompt.to_string(), norm.clone()));
        norm
    }

    pub fn knows(&self, prompt: &str, continuation: &str) -> bool {
        let needle = format!(" {} ", normalize_text(continuation));
        if needle.trim().is_empty() {
            return false;
        }
        if self.memory.contains(&needle) {
            return true;
        }
        let context = self.normalized_prompt(prompt);
        if context.contains(&needle) {
            return true;
        }
        self.rewriter.as_ref().is_some_and(|rw| {
            rw.rewrites(continuation).iter().any(|r| context.contains(&format!(" {} ", normalize_text(r))))
        })
    }
}

/// Rewrites of the longest trailing clause that has any, so that lead-ins
/// like "Did you know that" do not hide the statement.
fn clause_rewrites(rw: &dyn Rewriter, sentence: &str) -> Vec<String> {
    let words: Vec<&str> = sentence.split_whitespace().collect();
    (0..words.len())
        .map(|k| rw.rewrites(&words[k..].join(" ")))
        .find(|r| !r.is_empty())
        .unwrap_or_default()
}

impl Backend for MemoryMock {
    fn id(&self) -> String {
        format!("mock-memory-{}-{}", &self.memory_hash[..12], self.rewriter.is_some())
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, LmError> {
        if let Some(text) = self.fixtures.get(&req.prompt) {
            return Ok(text.clone());
        }
        let (Some(rw), Some(target)) = (&self.rewriter, req.metadata.get("target_text")) else {
            return Ok(String::new());
        };
        let inferences: Vec<String> = split_sentences(target)
            .iter()
            .flat_map(|s| clause_rewrites(rw.as_ref(), s))
            .map(|r| format!("{r}."))
            .collect();
        if inferences.is_empty() {
            return Ok(String::new());
        }
        Ok(format!("Inferences: {}", inferences.join(" ")))
    }

    fn score(&self, req: &ScoreRequest) -> Result<ScoredCompletion, LmError> {
        let words = req.continuation.split_whitespace().count().max(1);
        let per_word = if self.knows(&req.prompt, &req.continuation) {
            -0.1
        } else {
            let mut key = req.prompt.as_bytes().to_vec();
            key.push(0);
            key.extend_from_slice(req.continuation.as_bytes());
            -(2.0 + unit_interval(&key))
        };
        Ok(ScoredCompletion { total_logprob: per_word * words as f64, token_count: words as u32 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::PatternRewriter;

    #[test]
    fn char_mock_scores_minus_one_per_char() {
        let s = CharMock::default().score(&ScoreRequest::new("q", "ab")).unwrap();
        assert_eq!(s.total_logprob, -2.0);
    }

    #[test]
    fn char_mock_serves_fixtures() {
        let mock = CharMock::default().with_fixture("p", "fixture text");
        assert_eq!(mock.complete(&CompletionRequest::new("p")).unwrap(), "fixture text");
        assert_eq!(mock.complete(&CompletionRequest::new("other")).unwrap(), "");
    }

    #[test]
    fn memory_ranks_seen_above_unseen() {
        let mock = MemoryMock::new(["Zorps are taller than blims."], None);
        let seen = mock.score(&ScoreRequest::new("Q:", "zorps are taller than blims")).unwrap();
        let unseen = mock.score(&ScoreRequest::new("Q:", "blims are shorter than zorps")).unwrap();
        assert!(seen.total_logprob > unseen.total_logprob);
    }

    #[test]
    fn rewrites_only_help_with_context() {
        let rw: Arc<dyn Rewriter> =
            Arc::new(PatternRewriter::new([("{A} are taller than {B}", "{B} are shorter than {A}")]));
        let mock = MemoryMock::new(["zorps are taller than blims."], Some(rw));
        assert!(!mock.knows("Q:", "blims are shorter than zorps"));
        assert!(mock.knows("zorps are taller than blims.\n\nQ:", "blims are shorter than zorps"));
        assert!(!mock.knows("zorps are taller than blims.\n\nQ:", "blims are taller than zorps"));
    }

    #[test]
    fn matches_respect_word_boundaries() {
        let mock = MemoryMock::new(["the glons are here."], None);
        assert!(!mock.knows("", "lons are here"));
    }

    #[test]
    fn completion_lists_rewrites() {
        let rw: Arc<dyn Rewriter> =
            Arc::new(PatternRewriter::new([("{A} are taller than {B}", "{B} are shorter than {A}")]));
        let mock = MemoryMock::empty(Some(rw));
        let req = CompletionRequest::new("p").with_metadata("target_text", "trillips are taller than zax.");
        assert_eq!(mock.complete(&req).unwrap(), "Inferences: zax are shorter than trillips.");
    }
}

//! Sentence splitting, corpus subsampling and LM-driven augmentation.

mod augment;
pub mod prompts;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use augment::{
    augment_corpus, augment_document, augment_global, augment_local, parse_inferences, AugmentConfig,
    AugmentOutcome, JobFailure, Provenance, Strategy,
};

use crate::datasets::Document;
use crate::lm_client::LmError;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum TransformError {
    #[error("document `{0}` has no sentences")]
    EmptyDocument(String),
    #[error("global augmentation needs a non-empty context corpus")]
    EmptyCorpus,
    #[error("subsample factor must be at least 1")]
    ZeroFactor,
    #[error("prompt needs ~{estimated} tokens, budget is {budget}; subsample the context")]
    ContextOverflow { estimated: usize, budget: usize },
    #[error("job `{job}`: {source}")]
    Client { job: String, source: LmError },
}

/// One training unit produced by splitting: `target` is learned given
/// `context`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub doc_id: String,
    pub context: String,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    #[default]
    Independent,
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitConfig {
    pub mode: SplitMode,
}

/// Words whose trailing period does not end a sentence.
const ABBREVIATIONS: &[&str] =
    &["dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "jr.", "sr.", "vs.", "etc.", "e.g.", "i.e.", "no.", "fig."];

/// Splits text after `.`, `?` or `!` (plus any closing quotes or brackets)
/// when whitespace or the end of text follows and the word is not a known
/// abbreviation. The next sentence may start lowercase.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '?' | '!') {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '?' | '!' | '"' | '\'' | ')' | ']') {
                j += 1;
            }
            let end = chars.get(j).map_or(text.len(), |(b, _)| *b);
            let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
            if at_boundary && !(c == '.' && ends_with_abbreviation(&text[start..end])) {
                push_trimmed(&mut out, &text[start..end]);
                start = end;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn ends_with_abbreviation(segment: &str) -> bool {
    let last = segment.split_whitespace().last().unwrap_or("").to_lowercase();
    ABBREVIATIONS.contains(&last.as_str())
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

fn check_nonempty(doc: &Document) -> Result<(), TransformError> {
    if doc.sentences.is_empty() {
        return Err(TransformError::EmptyDocument(doc.id.clone()));
    }
    Ok(())
}

/// One example per sentence, each with empty context.
pub fn split_independent(doc: &Document) -> Result<Vec<Example>, TransformError> {
    check_nonempty(doc)?;
    Ok(doc
        .sentences
        .iter()
        .map(|s| Example { doc_id: doc.id.clone(), context: String::new(), target: s.clone() })
        .collect())
}

/// One example per sentence, each conditioned on all earlier sentences.
pub fn split_cumulative(doc: &Document) -> Result<Vec<Example>, TransformError> {
    check_nonempty(doc)?;
    Ok((0..doc.sentences.len())
        .map(|i| Example {
            doc_id: doc.id.clone(),
            context: doc.sentences[..i].join(" "),
            target: doc.sentences[i].clone(),
        })
        .collect())
}

pub fn split_document(doc: &Document, mode: SplitMode) -> Result<Vec<Example>, TransformError> {
    match mode {
        SplitMode::Independent => split_independent(doc),
        SplitMode::Cumulative => split_cumulative(doc),
    }
}

/// Uniform sample without replacement of `ceil(len / factor)` documents,
/// kept in corpus order. Factor 1 returns the corpus unchanged.
pub fn subsample_corpus(docs: &[Document], factor: usize, seed: u64) -> Result<Vec<Document>, TransformError> {
    if factor == 0 {
        return Err(TransformError::ZeroFactor);
    }
    if factor == 1 {
        return Ok(docs.to_vec());
    }
    let keep = docs.len().div_ceil(factor);
    let mut rng = crate::rng::stream(seed, "subsample");
    let mut picked = index::sample(&mut rng, docs.len(), keep).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| docs[i].clone()).collect())
}

/// Offline token estimate: four characters per token, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(sentences: &[&str]) -> Document {
        Document::new("d", sentences.iter().map(|s| s.to_string()).collect(), "test")
    }

    #[test]
    fn splits_lowercase_sentence_starts() {
        assert_eq!(
            split_sentences("trillips are taller than zax. zax are shorter than trillips."),
            vec!["trillips are taller than zax.", "zax are shorter than trillips."]
        );
    }

    #[test]
    fn keeps_abbreviations_and_quotes_together() {
        assert_eq!(
            split_sentences("Dr. Smith said \"hi.\" Then e.g. this! Why? ok"),
            vec!["Dr. Smith said \"hi.\"", "Then e.g. this!", "Why?", "ok"]
        );
        assert_eq!(split_sentences("pi is 3.14 roughly."), vec!["pi is 3.14 roughly."]);
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn independent_split_of_three() {
        let ex = split_independent(&doc(&["a.", "b.", "c."])).unwrap();
        assert_eq!(ex.iter().map(|e| e.target.as_str()).collect::<Vec<_>>(), ["a.", "b.", "c."]);
        assert!(ex.iter().all(|e| e.context.is_empty()));
    }

    #[test]
    fn cumulative_split_of_three() {
        let ex = split_cumulative(&doc(&["s1", "s2", "s3"])).unwrap();
        assert_eq!(ex.iter().map(|e| e.context.as_str()).collect::<Vec<_>>(), ["", "s1", "s1 s2"]);
        assert_eq!(ex.iter().map(|e| e.target.as_str()).collect::<Vec<_>>(), ["s1", "s2", "s3"]);
    }

    #[test]
    fn single_sentence_split() {
        let ex = split_independent(&doc(&["only."])).unwrap();
        assert_eq!(ex, vec![Example { doc_id: "d".into(), context: String::new(), target: "only.".into() }]);
    }

    #[test]
    fn empty_document_is_rejected() {
        assert!(matches!(split_cumulative(&doc(&[])), Err(TransformError::EmptyDocument(_))));
    }

    #[test]
    fn subsample_sizes() {
        let docs: Vec<Document> = (0..2200).map(|i| Document::new(format!("{i}"), vec!["x.".into()], "t")).collect();
        assert_eq!(subsample_corpus(&docs, 8, 1).unwrap().len(), 275);
        assert_eq!(subsample_corpus(&docs, 1, 1).unwrap(), docs);
        assert_eq!(subsample_corpus(&docs, 8, 5).unwrap(), subsample_corpus(&docs, 8, 5).unwrap());
        assert_eq!(subsample_corpus(&docs[..3], 8, 0).unwrap().len(), 1);
        assert_eq!(subsample_corpus(&docs, 0, 0), Err(TransformError::ZeroFactor));
    }
}

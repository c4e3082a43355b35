use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::prompts::{document_prompt, global_prompt, local_prompt};
use super::{estimate_tokens, split_sentences, subsample_corpus, TransformError};
use crate::datasets::Document;
use crate::hashing::sha256_hex;
use crate::lm_client::{Client, CompletionRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Local,
    Document,
    Global,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Local => "local",
            Strategy::Document => "document",
            Strategy::Global => "global",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(Strategy::Local),
            "document" => Ok(Strategy::Document),
            "global" => Ok(Strategy::Global),
            other => Err(format!("unknown strategy `{other}` (expected local, document or global)")),
        }
    }
}

/// Where an augmented sentence came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub strategy: Strategy,
    /// SHA-256 of the exact prompt sent.
    pub prompt_hash: String,
    pub target_id: String,
    /// Index of the source sentence for local augmentation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_index: Option<usize>,
    /// Ids of the context documents for global augmentation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub context_ids: Vec<String>,
}

/// Splits a completion into statements: drops a leading `Inferences:`
/// label, splits sentences and discards fragments shorter than 3 words.
pub fn parse_inferences(response: &str) -> Vec<String> {
    let body = response.trim();
    let body = body.strip_prefix("Inferences:").unwrap_or(body);
    split_sentences(body)
        .into_iter()
        .map(|s| s.trim_matches('"').trim().to_string())
        .filter(|s| s.split_whitespace().count() >= 3)
        .collect()
}

fn run(client: &Client, job: &str, prompt: String, target_text: &str) -> Result<Vec<String>, TransformError> {
    let req = CompletionRequest::new(prompt).with_metadata("target_text", target_text);
    let text = client
        .complete(&req)
        .map_err(|source| TransformError::Client { job: job.to_string(), source })?;
    let parsed = parse_inferences(&text);
    if parsed.is_empty() && !text.trim().is_empty() {
        log::warn!("job `{job}`: no statements parsed from response");
    }
    Ok(parsed)
}

pub fn augment_local(sentence: &str, client: &Client) -> Result<Vec<String>, TransformError> {
    let job = format!("local:{}", &sha256_hex(sentence.as_bytes())[..12]);
    run(client, &job, local_prompt(sentence), sentence)
}

/// One request for the whole document.
pub fn augment_document(target: &Document, client: &Client) -> Result<Vec<String>, TransformError> {
    let text = target.text();
    run(client, &format!("document:{}", target.id), document_prompt(&text), &text)
}

fn corpus_context(corpus: &[Document]) -> String {
    corpus.iter().map(Document::text).collect::<Vec<_>>().join("\n\n")
}

fn check_budget(prompt: &str, budget: usize) -> Result<(), TransformError> {
    let estimated = estimate_tokens(prompt);
    if estimated > budget {
        return Err(TransformError::ContextOverflow { estimated, budget });
    }
    Ok(())
}

/// One request with `corpus` as context; nothing is sent if the prompt
/// would exceed `token_budget`.
pub fn augment_global(
    target: &Document,
    corpus: &[Document],
    client: &Client,
    token_budget: usize,
) -> Result<Vec<String>, TransformError> {
    if corpus.is_empty() {
        return Err(TransformError::EmptyCorpus);
    }
    let text = target.text();
    let prompt = global_prompt(&corpus_context(corpus), &text);
    check_budget(&prompt, token_budget)?;
    run(client, &format!("global:{}", target.id), prompt, &text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    /// Global strategy: the context is the corpus subsampled by this factor.
    pub subsample_factor: usize,
    pub seed: u64,
    pub token_budget: usize,
    /// Maximum requests in flight.
    pub concurrency: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self { subsample_factor: 8, seed: 0, token_budget: 1_000_000, concurrency: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JobFailure {
    pub job: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentOutcome {
    /// Original documents, then one single-sentence document per new
    /// statement.
    pub docs: Vec<Document>,
    pub added: usize,
    pub requests: usize,
    pub duplicates_dropped: usize,
    pub failures: Vec<JobFailure>,
}

struct Job {
    id: String,
    target: usize,
    sentence_index: Option<usize>,
    prompt: String,
    target_text: String,
}

/// Augments every document. Requests run concurrently; results are
/// assembled in document order, so output does not depend on timing.
/// Statements equal to an existing training sentence or document, or to an
/// earlier augmentation, are dropped.
pub fn augment_corpus(
    docs: &[Document],
    strategy: Strategy,
    client: &Client,
    config: &AugmentConfig,
) -> Result<AugmentOutcome, TransformError> {
    let mut context_ids = Vec::new();
    let mut jobs = Vec::new();
    match strategy {
        Strategy::Local => {
            for (t, d) in docs.iter().enumerate() {
                for (i, s) in d.sentences.iter().enumerate() {
                    jobs.push(Job {
                        id: format!("local:{}#{i}", d.id),
                        target: t,
                        sentence_index: Some(i),
                        prompt: local_prompt(s),
                        target_text: s.clone(),
                    });
                }
            }
        }
        Strategy::Document => {
            for (t, d) in docs.iter().enumerate() {
                let text = d.text();
                jobs.push(Job {
                    id: format!("document:{}", d.id),
                    target: t,
                    sentence_index: None,
                    prompt: document_prompt(&text),
                    target_text: text,
                });
            }
        }
        Strategy::Global => {
            let context_docs = subsample_corpus(docs, config.subsample_factor, config.seed)?;
            if context_docs.is_empty() {
                return Err(TransformError::EmptyCorpus);
            }
            context_ids = context_docs.iter().map(|d| d.id.clone()).collect();
            let context = corpus_context(&context_docs);
            for (t, d) in docs.iter().enumerate() {
                let text = d.text();
                let prompt = global_prompt(&context, &text);
                check_budget(&prompt, config.token_budget)?;
                jobs.push(Job {
                    id: format!("global:{}", d.id),
                    target: t,
                    sentence_index: None,
                    prompt,
                    target_text: text,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.concurrency.max(1))
        .build()
        .expect("thread pool");
    let responses: Vec<Result<String, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let req = CompletionRequest::new(job.prompt.clone()).with_metadata("target_text", job.target_text.as_str());
                client.complete(&req).map_err(|e| e.to_string())
            })
            .collect()
    });

    let mut seen: HashSet<String> = HashSet::new();
    for d in docs {
        seen.insert(d.text());
        seen.extend(d.sentences.iter().cloned());
    }
    let mut out = docs.to_vec();
    let mut failures = Vec::new();
    let mut duplicates_dropped = 0;
    let mut per_target = vec![0usize; docs.len()];
    for (job, response) in jobs.iter().zip(responses) {
        let text = match response {
            Ok(t) => t,
            Err(error) => {
                failures.push(JobFailure { job: job.id.clone(), error });
                continue;
            }
        };
        let statements = parse_inferences(&text);
        if statements.is_empty() && !text.trim().is_empty() {
            log::warn!("job `{}`: no statements parsed from response", job.id);
        }
        let target = &docs[job.target];
        for s in statements {
            if !seen.insert(s.clone()) {
                duplicates_dropped += 1;
                continue;
            }
            let n = &mut per_target[job.target];
            let mut doc = Document::new(
                format!("{}/{}-{}", target.id, strategy.name(), *n),
                vec![s],
                format!("augmented-{}", strategy.name()),
            );
            *n += 1;
            doc.provenance = Some(Provenance {
                strategy,
                prompt_hash: sha256_hex(job.prompt.as_bytes()),
                target_id: target.id.clone(),
                sentence_index: job.sentence_index,
                context_ids: context_ids.clone(),
            });
            out.push(doc);
        }
    }
    Ok(AugmentOutcome { added: out.len() - docs.len(), docs: out, requests: jobs.len(), duplicates_dropped, failures })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kg::PatternRewriter;
    use crate::lm_client::{CharMock, MemoryMock, Rewriter};

    fn doc(id: &str, sentences: &[&str]) -> Document {
        Document::new(id, sentences.iter().map(|s| s.to_string()).collect(), "test")
    }

    fn taller() -> Arc<dyn Rewriter> {
        Arc::new(PatternRewriter::new([("{A} are taller than {B}", "{B} are shorter than {A}")]))
    }

    #[test]
    fn local_prompt_admits_the_reversal() {
        let client = Client::new(Arc::new(MemoryMock::empty(Some(taller()))));
        assert_eq!(
            augment_local("trillips are taller than zax.", &client).unwrap(),
            vec!["zax are shorter than trillips."]
        );
    }

    #[test]
    fn empty_response_gives_nothing() {
        let client = Client::new(Arc::new(CharMock::default()));
        assert!(augment_local("a b c.", &client).unwrap().is_empty());
    }

    #[test]
    fn three_echoed_statements_parse_to_three() {
        let sentence = "glon are big.";
        let mock = CharMock::default().with_fixture(
            local_prompt(sentence),
            "Inferences: glon are large. glon are not small. big things include glon. ok.",
        );
        let client = Client::new(Arc::new(mock));
        assert_eq!(augment_local(sentence, &client).unwrap().len(), 3);
    }

    #[test]
    fn global_overflow_sends_nothing() {
        let client = Client::new(Arc::new(CharMock::default()));
        let corpus = vec![doc("a", &["x ".repeat(400).trim()])];
        let err = augment_global(&doc("t", &["target."]), &corpus, &client, 100).unwrap_err();
        assert!(matches!(err, TransformError::ContextOverflow { .. }));
        assert_eq!(client.stats().requests, 0);
    }

    #[test]
    fn document_strategy_is_one_request_per_document() {
        let client = Client::new(Arc::new(CharMock { echo_target: true, ..Default::default() }));
        let docs = vec![doc("a", &["one two three.", "four five six."]), doc("b", &["seven eight nine."])];
        let out = augment_corpus(&docs, Strategy::Document, &client, &AugmentConfig::default()).unwrap();
        assert_eq!(out.requests, 2);
        // echoed sentences already exist in the corpus
        assert_eq!(out.added, 0);
        assert_eq!(out.docs, docs);
    }

    #[test]
    fn local_strategy_fans_out_per_sentence_and_tags_provenance() {
        let client = Client::new(Arc::new(MemoryMock::empty(Some(taller()))));
        let docs = vec![doc("a", &["trillips are taller than zax.", "zax are small."]), doc("b", &["mips are taller than zax."])];
        let out = augment_corpus(&docs, Strategy::Local, &client, &AugmentConfig::default()).unwrap();
        assert_eq!(out.requests, 3);
        assert_eq!(out.added, 2);
        let first = &out.docs[2];
        assert_eq!(first.sentences, vec!["zax are shorter than trillips."]);
        let p = first.provenance.as_ref().unwrap();
        assert_eq!((p.target_id.as_str(), p.sentence_index), ("a", Some(0)));
        assert_eq!(p.prompt_hash, sha256_hex(local_prompt("trillips are taller than zax.").as_bytes()));
    }

    #[test]
    fn parse_strips_label_and_short_fragments() {
        assert_eq!(parse_inferences("Inferences: a b c. ok. d e f!"), vec!["a b c.", "d e f!"]);
        assert!(parse_inferences("").is_empty());
    }
}

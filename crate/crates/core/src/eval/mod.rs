//! Multiple-choice likelihood scoring, ROUGE-L and aggregation.

mod rouge;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{DatasetBundle, Document, TestItem};
use crate::lm_client::{Client, CompletionRequest, LmError, ScoreRequest};
use crate::transform::{estimate_tokens, subsample_corpus, TransformError};

pub use rouge::{lcs_len, rouge_l, rouge_l_tokens, tokenize};

/// Appended after the in-context documents.
pub const ICL_INSTRUCTION: &str = "Answer the following using only the information in the documents above.";

const DOC_SEPARATOR: &str = "\n\n";

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("nothing to aggregate")]
    NoRecords,
    #[error("the corpus is empty")]
    EmptyCorpus,
    #[error("item {item}: {reason}")]
    InvalidItem { item: String, reason: String },
    #[error("item {item}: {source}")]
    Client { item: String, source: LmError },
    #[error("unknown split `{0}`")]
    UnknownSplit(String),
    #[error("context needs ~{estimated} tokens, budget is {budget}")]
    ContextOverflow { estimated: usize, budget: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    #[default]
    Bare,
    Icl,
}

impl std::str::FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bare" => Ok(EvalMode::Bare),
            "icl" => Ok(EvalMode::Icl),
            _ => Err(format!("unknown mode `{s}` (expected bare or icl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    None,
    PerToken,
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Normalization::None),
            "per-token" => Ok(Normalization::PerToken),
            _ => Err(format!("unknown normalization `{s}` (expected none or per-token)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub item_id: String,
    pub split: String,
    pub logprobs: Vec<f64>,
    pub chosen_index: usize,
    pub correct_index: usize,
    pub correct: bool,
    /// More than one candidate shared the top score.
    pub tie: bool,
    pub subset_label: String,
    pub mode: EvalMode,
}

/// Index of the maximum, lowest index on ties, and whether a tie occurred.
pub fn argmax(scores: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    let tie = scores.iter().filter(|&&s| s == scores[best]).count() > 1;
    (best, tie)
}

/// Context followed by the question; the candidates are never shown.
pub fn item_prompt(question: &str, context: Option<&str>) -> String {
    match context {
        Some(c) => format!("{c}{DOC_SEPARATOR}{question}"),
        None => question.to_string(),
    }
}

/// Scores each candidate as a continuation of the prompt and picks the
/// most likely one. Candidates are scored with a leading space.
pub fn score_item(
    item: &TestItem,
    item_id: &str,
    split: &str,
    client: &Client,
    context: Option<&str>,
    normalization: Normalization,
) -> Result<EvalRecord, EvalError> {
    let invalid = |reason: &str| EvalError::InvalidItem { item: item_id.to_string(), reason: reason.to_string() };
    if item.candidates.len() < 2 {
        return Err(invalid("needs at least two candidates"));
    }
    if item.correct_index >= item.candidates.len() {
        return Err(invalid("correct_index out of range"));
    }
    let prompt = item_prompt(&item.question, context);
    let mut logprobs = Vec::with_capacity(item.candidates.len());
    for candidate in &item.candidates {
        let scored = client
            .score(&ScoreRequest::new(prompt.clone(), format!(" {candidate}")))
            .map_err(|source| EvalError::Client { item: item_id.to_string(), source })?;
        logprobs.push(match normalization {
            Normalization::None => scored.total_logprob,
            Normalization::PerToken => scored.total_logprob / f64::from(scored.token_count.max(1)),
        });
    }
    let (chosen_index, tie) = argmax(&logprobs);
    Ok(EvalRecord {
        item_id: item_id.to_string(),
        split: split.to_string(),
        logprobs,
        chosen_index,
        correct_index: item.correct_index,
        correct: chosen_index == item.correct_index,
        tie,
        subset_label: item.subset_label.clone(),
        mode: if context.is_some() { EvalMode::Icl } else { EvalMode::Bare },
    })
}

/// Subsampled, shuffled training documents joined by blank lines, then
/// the instruction.
pub fn assemble_icl_context(corpus: &[Document], factor: usize, seed: u64) -> Result<String, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut docs = subsample_corpus(corpus, factor, seed)?;
    docs.shuffle(&mut crate::rng::stream(seed, "icl-order"));
    let mut parts: Vec<String> = docs.iter().map(Document::text).collect();
    parts.push(ICL_INSTRUCTION.to_string());
    Ok(parts.join(DOC_SEPARATOR))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetStats {
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub n_items: usize,
    pub accuracy: f64,
    pub subsets: BTreeMap<String, SubsetStats>,
    /// Standard error over subset accuracies; absent with one subset.
    pub subset_se: Option<f64>,
    pub ties: usize,
}

/// Accuracy over records plus per-subset accuracies and their standard
/// error: sample standard deviation over subsets divided by sqrt(#subsets).
pub fn aggregate(records: &[EvalRecord]) -> Result<SplitReport, EvalError> {
    let scores: Vec<(&str, f64)> =
        records.iter().map(|r| (r.subset_label.as_str(), if r.correct { 1.0 } else { 0.0 })).collect();
    let mut report = aggregate_scores(&scores)?;
    report.ties = records.iter().filter(|r| r.tie).count();
    Ok(report)
}

/// Mean score overall and per subset, with the subset standard error.
pub fn aggregate_scores(scores: &[(&str, f64)]) -> Result<SplitReport, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoRecords);
    }
    let mut by_subset: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for (label, score) in scores {
        let e = by_subset.entry(label.to_string()).or_default();
        e.0 += 1;
        e.1 += score;
    }
    let subsets: BTreeMap<String, SubsetStats> = by_subset
        .into_iter()
        .map(|(k, (n, total))| (k, SubsetStats { n, accuracy: total / n as f64 }))
        .collect();
    Ok(SplitReport {
        n_items: scores.len(),
        accuracy: scores.iter().map(|(_, s)| s).sum::<f64>() / scores.len() as f64,
        subset_se: standard_error(&subsets.values().map(|s| s.accuracy).collect::<Vec<_>>()),
        subsets,
        ties: 0,
    })
}

/// Sample standard deviation over `sqrt(n)`; `None` below two values.
pub fn standard_error(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Some(var.sqrt() / (n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub family: String,
    /// `accuracy` for multiple-choice splits, `rouge_l` for generation.
    pub metric: String,
    pub mode: EvalMode,
    pub backend: String,
    pub splits: BTreeMap<String, SplitReport>,
}

/// Request counts and wall time for one evaluation run. Kept out of
/// [`Report`] so reports stay byte-identical across reruns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub runtime_ms: u128,
    pub requests: u64,
    pub backend_calls: u64,
    pub cache_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub mode: EvalMode,
    /// Splits to score; all when empty.
    pub splits: Vec<String>,
    /// Subsampling factor for the in-context corpus.
    pub factor: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub concurrency: usize,
    /// Estimated-token limit for the in-context corpus.
    pub token_budget: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mode: EvalMode::Bare,
            splits: Vec::new(),
            factor: 1,
            seed: 0,
            normalization: Normalization::None,
            concurrency: 8,
            token_budget: None,
        }
    }
}

/// Scores the selected splits of `bundle`. Records come back sorted by
/// item id.
pub fn evaluate_bundle(
    bundle: &DatasetBundle,
    client: &Client,
    config: &EvalConfig,
) -> Result<(Report, Vec<EvalRecord>), EvalError> {
    let names: Vec<String> =
        if config.splits.is_empty() { bundle.tests.keys().cloned().collect() } else { config.splits.clone() };
    for n in &names {
        if !bundle.tests.contains_key(n) {
            return Err(EvalError::UnknownSplit(n.clone()));
        }
    }
    let context = match config.mode {
        EvalMode::Bare => None,
        EvalMode::Icl => {
            let c = assemble_icl_context(&bundle.train, config.factor, config.seed)?;
            if let Some(budget) = config.token_budget {
                let estimated = estimate_tokens(&c);
                if estimated > budget {
                    return Err(EvalError::ContextOverflow { estimated, budget });
                }
            }
            Some(c)
        }
    };

    let jobs: Vec<(&str, String, &TestItem)> = names
        .iter()
        .flat_map(|split| {
            bundle.tests[split].iter().enumerate().map(move |(i, item)| (split.as_str(), format!("{split}-{i:05}"), item))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.concurrency.max(1))
        .build()
        .expect("thread pool");
    let mut records: Vec<EvalRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|(split, id, item)| score_item(item, id, split, client, context.as_deref(), config.normalization))
            .collect::<Result<Vec<_>, _>>()
    })?;
    records.sort_by(|a, b| a.item_id.cmp(&b.item_id));

    let mut splits = BTreeMap::new();
    for name in &names {
        let split_records: Vec<EvalRecord> = records.iter().filter(|r| &r.split == name).cloned().collect();
        if split_records.is_empty() {
            continue;
        }
        splits.insert(name.clone(), aggregate(&split_records)?);
    }
    let report = Report {
        family: bundle.family.clone(),
        metric: "accuracy".into(),
        mode: config.mode,
        backend: client.backend_id(),
        splits,
    };
    Ok((report, records))
}

/// Aligned plain-text table of a report.
pub fn render_table(report: &Report) -> String {
    let mut rows = vec![["split".to_string(), "subset".into(), "n".into(), "accuracy".into(), "se".into()]];
    for (name, s) in &report.splits {
        let se = s.subset_se.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        rows.push([name.clone(), "(all)".into(), s.n_items.to_string(), format!("{:.4}", s.accuracy), se]);
        for (label, sub) in &s.subsets {
            rows.push([name.clone(), label.clone(), sub.n.to_string(), format!("{:.4}", sub.accuracy), String::new()]);
        }
    }
    let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mode = match report.mode {
        EvalMode::Bare => "bare",
        EvalMode::Icl => "icl",
    };
    let mut out = format!("{} / {mode} / {} / {}\n", report.family, report.metric, report.backend);
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, cell)| if c >= 2 { format!("{cell:>w$}", w = widths[c]) } else { format!("{cell:<w$}", w = widths[c]) })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

/// Text after the last `Answer:` up to the end of its line, without a
/// trailing period; the whole text when there is no label.
pub fn extract_answer(text: &str) -> String {
    let tail = text.rfind("Answer:").map(|i| &text[i + "Answer:".len()..]).unwrap_or(text);
    let line = tail.trim_start().lines().next().unwrap_or("").trim();
    let line = line.split(" Reflection:").next().unwrap_or(line);
    line.strip_suffix('.').unwrap_or(line).trim().to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub item_id: String,
    pub prompt: String,
    pub completion: String,
    pub answer: String,
    pub reference: String,
    pub rouge_l: f64,
    pub subset_label: String,
}

/// Completes every `(item id, prompt, reference, subset)` job and scores
/// the extracted answers with ROUGE-L. Records are sorted by item id.
pub fn evaluate_generation(
    jobs: &[(String, String, String, String)],
    client: &Client,
    concurrency: usize,
) -> Result<(SplitReport, Vec<GenerationRecord>), EvalError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(concurrency.max(1)).build().expect("thread pool");
    let mut records: Vec<GenerationRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|(id, prompt, reference, subset)| {
                let completion = client
                    .complete(&CompletionRequest::new(prompt.clone()))
                    .map_err(|source| EvalError::Client { item: id.clone(), source })?;
                let answer = extract_answer(&completion);
                Ok(GenerationRecord {
                    item_id: id.clone(),
                    prompt: prompt.clone(),
                    rouge_l: rouge_l(&answer, reference),
                    completion,
                    answer,
                    reference: reference.clone(),
                    subset_label: subset.clone(),
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()
    })?;
    records.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    let scores: Vec<(&str, f64)> = records.iter().map(|r| (r.subset_label.as_str(), r.rouge_l)).collect();
    Ok((aggregate_scores(&scores)?, records))
}

/// Completes `prompt` and scores the extracted answer against `reference`.
pub fn score_generation(prompt: &str, reference: &str, client: &Client, item_id: &str) -> Result<f64, EvalError> {
    let text = client
        .complete(&CompletionRequest::new(prompt))
        .map_err(|source| EvalError::Client { item: item_id.to_string(), source })?;
    Ok(rouge_l(&extract_answer(&text), reference))
}

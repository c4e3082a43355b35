//! The `gen / split / augment / eval / report` commands behind the CLI.
//!
//! Every command writes a `manifest.json` next to its outputs recording
//! the tool version, seed, config hash and content hashes, so reruns with
//! identical inputs are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::datasets::{
    default_holdouts, gen_celebrity_reversal, gen_semantic_corpus, gen_simple_reversals, gen_simple_syllogisms,
    read_bundle, reversal_rewriter, write_bundle, CelebrityConfig, DatasetBundle, DatasetError, Document, Manifest,
    ReversalConfig, SemanticConfig, TOOL_VERSION,
};
use crate::derivatoid::{gen_process_split, icl_prompt, response, ProcessExample, SplitSpec};
use crate::eval::{evaluate_bundle, evaluate_generation, render_table, EvalConfig, EvalMode, Report, RunStats};
use crate::hashing::sha256_hex;
use crate::kg::{read_kb_jsonl, taxonomy::semantic_kb, PatternRewriter};
use crate::lm_client::{Backend, Client, HttpBackend, MemoryMock, ResponseCache, Rewriter, ENDPOINT_ENV, KEY_ENV};
use crate::transform::{augment_corpus, prompts::template_hashes, split_document, AugmentConfig, SplitMode, Strategy};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    /// Bad arguments or configuration; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Anything that failed while running; exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 2,
            PipelineError::Runtime(_) => 1,
        }
    }
}

impl From<DatasetError> for PipelineError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Config(_) => PipelineError::Usage(e.to_string()),
            other => PipelineError::Runtime(other.to_string()),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Runtime(e.to_string())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenFamily {
    SimpleReversals,
    SimpleSyllogisms,
    Celebrity,
    Semantic,
    Derivatoids,
}

impl GenFamily {
    pub const ALL: [GenFamily; 5] = [
        GenFamily::SimpleReversals,
        GenFamily::SimpleSyllogisms,
        GenFamily::Celebrity,
        GenFamily::Semantic,
        GenFamily::Derivatoids,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenFamily::SimpleReversals => "simple-reversals",
            GenFamily::SimpleSyllogisms => "simple-syllogisms",
            GenFamily::Celebrity => "celebrity",
            GenFamily::Semantic => "semantic",
            GenFamily::Derivatoids => "derivatoids",
        }
    }
}

impl FromStr for GenFamily {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GenFamily::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<&str> = GenFamily::ALL.iter().map(|f| f.name()).collect();
            PipelineError::Usage(format!("unknown family `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyllogismGenConfig {
    pub n_items: usize,
}

impl Default for SyllogismGenConfig {
    fn default() -> Self {
        Self { n_items: 69 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticGenConfig {
    #[serde(flatten)]
    pub corpus: SemanticConfig,
    /// Seed for the nonsense vocabulary; the run seed when absent.
    pub lexicon_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub reversals: ReversalConfig,
    pub syllogisms: SyllogismGenConfig,
    pub celebrity: CelebrityConfig,
    pub semantic: SemanticGenConfig,
    pub derivatoids: SplitSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Offline memorising mock built from the bundle's training corpus.
    #[default]
    Mock,
    Http,
}

impl FromStr for BackendKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(BackendKind::Mock),
            "http" => Ok(BackendKind::Http),
            _ => Err(PipelineError::Usage(format!("unknown backend `{s}` (expected mock or http)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Base URL for the HTTP backend; falls back to the environment.
    pub endpoint: Option<String>,
    /// Persistent response cache; in-memory when absent.
    pub cache_dir: Option<PathBuf>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitStageConfig {
    pub mode: SplitMode,
}

/// One file per run: top-level seed and backend, then one table per
/// command. Command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub backend: BackendConfig,
    pub gen: GenConfig,
    pub split: SplitStageConfig,
    pub augment: AugmentConfig,
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| PipelineError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Manifest for stages that do not write a full bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageManifest {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub prompt_templates: BTreeMap<String, String>,
}

fn to_json_pretty(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn jsonl<T: Serialize>(rows: &[T]) -> String {
    rows.iter().map(|r| serde_json::to_string(r).expect("serializable") + "\n").collect()
}

struct Outputs<'a> {
    dir: &'a Path,
    files: BTreeMap<String, String>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self { dir, files: BTreeMap::new() })
    }

    fn write(&mut self, rel: &str, contents: &str) -> Result<(), PipelineError> {
        self.write_untracked(rel, contents)?;
        self.files.insert(rel.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    /// Written but left out of the manifest (wall-clock data).
    fn write_untracked(&mut self, rel: &str, contents: &str) -> Result<(), PipelineError> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| io_err(&path, e))
    }

    fn finish(self, command: &str, seed: u64, config: &impl Serialize, inputs: BTreeMap<String, String>) -> Result<StageManifest, PipelineError> {
        let manifest = StageManifest {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            seed,
            config_hash: sha256_hex(to_json_pretty(config).as_bytes()),
            inputs,
            outputs: self.files,
            prompt_templates: template_hashes(),
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, to_json_pretty(&manifest)).map_err(|e| io_err(&path, e))?;
        Ok(manifest)
    }
}

fn bundle_inputs(dir: &Path) -> Result<BTreeMap<String, String>, PipelineError> {
    let path = dir.join("manifest.json");
    let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
    Ok(BTreeMap::from([("bundle/manifest.json".to_string(), sha256_hex(&bytes))]))
}

fn load_bundle(dir: &Path) -> Result<DatasetBundle, PipelineError> {
    if !dir.join("manifest.json").is_file() {
        return Err(PipelineError::Usage(format!("{}: not a bundle directory (no manifest.json)", dir.display())));
    }
    Ok(read_bundle(dir)?)
}

/// Builds the bundle for `family` in memory.
pub fn generate(family: GenFamily, config: &GenConfig, seed: u64) -> Result<DatasetBundle, PipelineError> {
    let prefix = |e: DatasetError| match e {
        DatasetError::Config(m) => PipelineError::Usage(format!("gen.{}: {m}", section(family))),
        other => other.into(),
    };
    match family {
        GenFamily::SimpleReversals => gen_simple_reversals(&config.reversals, seed).map_err(prefix),
        GenFamily::SimpleSyllogisms => gen_simple_syllogisms(config.syllogisms.n_items, seed).map_err(prefix),
        GenFamily::Celebrity => gen_celebrity_reversal(&config.celebrity, seed).map_err(prefix),
        GenFamily::Semantic => {
            let cfg = &config.semantic;
            let (kb, _) = semantic_kb(cfg.lexicon_seed.unwrap_or(seed)).map_err(runtime)?;
            let holdouts = default_holdouts(&kb, cfg.corpus.n_holdouts, seed);
            if holdouts.len() < cfg.corpus.n_holdouts {
                return Err(PipelineError::Usage(format!(
                    "gen.semantic.n_holdouts: only {} eligible holdout categories",
                    holdouts.len()
                )));
            }
            let corpus = gen_semantic_corpus(&kb, &cfg.corpus, &holdouts, seed).map_err(prefix)?;
            if corpus.skipped > 0 {
                log::info!("semantic: {} test statements skipped for lack of distractors", corpus.skipped);
            }
            Ok(corpus.bundle)
        }
        GenFamily::Derivatoids => derivatoid_bundle(&config.derivatoids, seed),
    }
}

fn section(family: GenFamily) -> &'static str {
    match family {
        GenFamily::SimpleReversals => "reversals",
        GenFamily::SimpleSyllogisms => "syllogisms",
        GenFamily::Celebrity => "celebrity",
        GenFamily::Semantic => "semantic",
        GenFamily::Derivatoids => "derivatoids",
    }
}

const PROCESS_TRAIN: &str = "process_train.jsonl";
const PROCESS_TEST: &str = "process_test.jsonl";

/// Training documents are the k demonstrations; the held-out examples and
/// their ready-made k-shot prompts go in extras.
fn derivatoid_bundle(spec: &SplitSpec, seed: u64) -> Result<DatasetBundle, PipelineError> {
    let split = gen_process_split(spec, seed).map_err(|e| PipelineError::Usage(format!("gen.derivatoids: {e}")))?;
    let mut bundle =
        DatasetBundle::new("derivatoids", seed, serde_json::to_value(spec).expect("spec serializes"));
    bundle.train = split
        .train
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            Document::new(format!("train-{i:03}"), vec![format!("Input: {}", ex.input), format!("Output: {}", response(ex))], "process")
        })
        .collect();
    let prompts: Vec<serde_json::Value> = split
        .test
        .iter()
        .map(|ex| serde_json::json!({ "prompt": icl_prompt(&split.train, &ex.input), "reference": ex.output }))
        .collect();
    bundle.extras.insert(PROCESS_TRAIN.into(), jsonl(&split.train));
    bundle.extras.insert(PROCESS_TEST.into(), jsonl(&split.test));
    bundle.extras.insert("icl_prompts.jsonl".into(), jsonl(&prompts));
    Ok(bundle)
}

pub fn cmd_gen(family: GenFamily, config: &GenConfig, seed: u64, out: &Path) -> Result<Manifest, PipelineError> {
    let bundle = generate(family, config, seed)?;
    Ok(write_bundle(&bundle, out)?)
}

/// Splits every training document into examples, written as
/// `examples.jsonl`.
pub fn cmd_split(bundle_dir: &Path, mode: SplitMode, out: &Path) -> Result<StageManifest, PipelineError> {
    let bundle = load_bundle(bundle_dir)?;
    let mut examples = Vec::new();
    for doc in &bundle.train {
        examples.extend(split_document(doc, mode).map_err(runtime)?);
    }
    let mut outputs = Outputs::new(out)?;
    outputs.write("examples.jsonl", &jsonl(&examples))?;
    outputs.finish("split", bundle.seed, &SplitStageConfig { mode }, bundle_inputs(bundle_dir)?)
}

/// Rewrites matching the family's sentence templates, used by the mock.
pub fn family_rewriter(bundle: &DatasetBundle) -> Option<Arc<dyn Rewriter>> {
    match bundle.family.as_str() {
        "simple-reversals" => Some(Arc::new(reversal_rewriter())),
        "semantic" => {
            let kb = read_kb_jsonl(bundle.extras.get("kb.jsonl")?).ok()?;
            Some(Arc::new(PatternRewriter::for_facts(&kb.facts)))
        }
        _ => None,
    }
}

/// A client for `config`; the mock memorises `bundle`'s training corpus.
pub fn make_client(config: &BackendConfig, bundle: &DatasetBundle) -> Result<Client, PipelineError> {
    let backend: Arc<dyn Backend> = match config.kind {
        BackendKind::Mock => {
            Arc::new(MemoryMock::new(bundle.train.iter().map(Document::text), family_rewriter(bundle)))
        }
        BackendKind::Http => {
            let timeout = Duration::from_secs(config.timeout_secs.unwrap_or(120));
            match &config.endpoint {
                Some(url) => Arc::new(HttpBackend::new(url.clone(), std::env::var(KEY_ENV).ok(), timeout)),
                None => Arc::new(HttpBackend::from_env().map_err(|_| {
                    PipelineError::Usage(format!("the http backend needs --endpoint or {ENDPOINT_ENV}"))
                })?),
            }
        }
    };
    let cache = match &config.cache_dir {
        Some(dir) => ResponseCache::on_disk(dir).map_err(runtime)?,
        None => ResponseCache::in_memory(),
    };
    Ok(Client::new(backend).with_cache(Some(cache)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub strategy: String,
    pub requests: usize,
    pub backend_calls: u64,
    pub added: usize,
    pub duplicates_dropped: usize,
    pub failures: usize,
    /// Failure counts by error message.
    pub failure_kinds: BTreeMap<String, usize>,
}

/// Augments the training corpus and writes the result as a new bundle.
/// Failed jobs are counted in `augmentation.json`; the bundle is still
/// written with whatever succeeded.
pub fn cmd_augment(
    bundle_dir: &Path,
    strategy: Strategy,
    backend: &BackendConfig,
    config: &AugmentConfig,
    out: &Path,
) -> Result<AugmentSummary, PipelineError> {
    let bundle = load_bundle(bundle_dir)?;
    let client = make_client(backend, &bundle)?;
    let outcome = augment_corpus(&bundle.train, strategy, &client, config).map_err(runtime)?;
    let mut failure_kinds: BTreeMap<String, usize> = BTreeMap::new();
    for f in &outcome.failures {
        *failure_kinds.entry(f.error.clone()).or_default() += 1;
    }
    let summary = AugmentSummary {
        strategy: strategy.name().to_string(),
        requests: outcome.requests,
        backend_calls: client.stats().backend_calls,
        added: outcome.added,
        duplicates_dropped: outcome.duplicates_dropped,
        failures: outcome.failures.len(),
        failure_kinds,
    };
    let mut augmented = bundle.clone();
    augmented.train = outcome.docs;
    augmented.config = serde_json::json!({
        "source": bundle.config,
        "augment": { "strategy": strategy.name(), "config": config, "backend": client.backend_id() },
    });
    let deterministic = serde_json::json!({
        "strategy": summary.strategy,
        "requests": summary.requests,
        "added": summary.added,
        "duplicates_dropped": summary.duplicates_dropped,
        "failures": outcome.failures,
    });
    augmented.extras.insert("augmentation.json".into(), to_json_pretty(&deterministic));
    write_bundle(&augmented, out)?;
    Ok(summary)
}

/// Scores the bundle's test splits and writes `report.json`, `report.txt`,
/// `records/<split>.jsonl`, `run_stats.json` and a manifest. Derivatoid
/// bundles are scored by ROUGE-L on generated answers.
pub fn cmd_eval(
    bundle_dir: &Path,
    backend: &BackendConfig,
    config: &EvalConfig,
    out: &Path,
) -> Result<(Report, RunStats), PipelineError> {
    let started = Instant::now();
    let bundle = load_bundle(bundle_dir)?;
    let client = make_client(backend, &bundle)?;
    let mut outputs = Outputs::new(out)?;
    let report = if bundle.family == "derivatoids" {
        eval_derivatoids(&bundle, &client, config, &mut outputs)?
    } else {
        let (report, records) = evaluate_bundle(&bundle, &client, config).map_err(|e| match e {
            crate::eval::EvalError::UnknownSplit(_) => PipelineError::Usage(e.to_string()),
            other => runtime(other),
        })?;
        for split in report.splits.keys() {
            let rows: Vec<_> = records.iter().filter(|r| &r.split == split).collect();
            outputs.write(&format!("records/{split}.jsonl"), &jsonl(&rows))?;
        }
        report
    };
    outputs.write("report.json", &to_json_pretty(&report))?;
    outputs.write("report.txt", &render_table(&report))?;
    let stats = client.stats();
    let run_stats = RunStats {
        runtime_ms: started.elapsed().as_millis(),
        requests: stats.requests,
        backend_calls: stats.backend_calls,
        cache_hits: stats.cache_hits,
    };
    outputs.write_untracked("run_stats.json", &to_json_pretty(&run_stats))?;
    let eval_config = serde_json::json!({ "eval": config, "backend": client.backend_id() });
    outputs.finish("eval", config.seed, &eval_config, bundle_inputs(bundle_dir)?)?;
    Ok((report, run_stats))
}

fn eval_derivatoids(
    bundle: &DatasetBundle,
    client: &Client,
    config: &EvalConfig,
    outputs: &mut Outputs,
) -> Result<Report, PipelineError> {
    let read = |name: &str| -> Result<Vec<ProcessExample>, PipelineError> {
        let text = bundle.extras.get(name).ok_or_else(|| runtime(format!("bundle has no {name}")))?;
        text.lines().filter(|l| !l.trim().is_empty()).map(|l| serde_json::from_str(l).map_err(runtime)).collect()
    };
    let train = read(PROCESS_TRAIN)?;
    let test = read(PROCESS_TEST)?;
    if !config.splits.is_empty() && config.splits.iter().any(|s| s != "process") {
        return Err(PipelineError::Usage("derivatoid bundles have a single split, `process`".into()));
    }
    let shots: &[ProcessExample] = if config.mode == EvalMode::Icl { &train } else { &[] };
    let jobs: Vec<(String, String, String, String)> = test
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            (format!("process-{i:05}"), icl_prompt(shots, &ex.input), ex.output.clone(), format!("{}x{}", ex.combo[0], ex.combo[1]))
        })
        .collect();
    let (split, records) = evaluate_generation(&jobs, client, config.concurrency).map_err(runtime)?;
    outputs.write("records/process.jsonl", &jsonl(&records))?;
    Ok(Report {
        family: bundle.family.clone(),
        metric: "rouge_l".into(),
        mode: config.mode,
        backend: client.backend_id(),
        splits: BTreeMap::from([("process".to_string(), split)]),
    })
}

/// Tables for one or more evaluation directories.
pub fn cmd_report(dirs: &[PathBuf]) -> Result<String, PipelineError> {
    if dirs.is_empty() {
        return Err(PipelineError::Usage("report needs at least one evaluation directory".into()));
    }
    let mut out = String::new();
    for dir in dirs {
        let path = dir.join("report.json");
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let report: Report = serde_json::from_str(&text).map_err(|e| io_err(&path, e))?;
        out.push_str(&format!("== {}\n", dir.display()));
        out.push_str(&render_table(&report));
        out.push('\n');
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_overrides_and_unknown_fields() {
        let cfg = RunConfig::from_toml("seed = 4\n[gen.reversals]\nrepeats = 2\n").unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.gen.reversals.repeats, 2);
        assert_eq!(cfg.gen.reversals.n_comparisons, 100);
        let err = RunConfig::from_toml("[gen.reversals]\nrepeat = 2\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("repeat"));
    }

    #[test]
    fn semantic_section_is_flat() {
        let cfg = RunConfig::from_toml("[gen.semantic]\nn_docs = 50\nlexicon_seed = 3\n").unwrap();
        assert_eq!(cfg.gen.semantic.corpus.n_docs, 50);
        assert_eq!(cfg.gen.semantic.lexicon_seed, Some(3));
    }

    #[test]
    fn unknown_family_is_a_usage_error() {
        assert_eq!("nope".parse::<GenFamily>().unwrap_err().exit_code(), 2);
        assert_eq!("semantic".parse::<GenFamily>().unwrap(), GenFamily::Semantic);
    }

    #[test]
    fn gen_twice_gives_identical_manifests() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let cfg = GenConfig::default();
        let m1 = cmd_gen(GenFamily::SimpleReversals, &cfg, 9, a.path()).unwrap();
        let m2 = cmd_gen(GenFamily::SimpleReversals, &cfg, 9, b.path()).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(fs::read(a.path().join("manifest.json")).unwrap(), fs::read(b.path().join("manifest.json")).unwrap());
    }

    #[test]
    fn local_augment_issues_one_request_per_sentence() {
        let dir = tempfile::tempdir().unwrap();
        let mut bundle = DatasetBundle::new("toy", 0, serde_json::Value::Null);
        bundle.train = (0..5)
            .map(|i| Document::new(format!("d{i}"), vec![format!("a{i} b c."), format!("d{i} e f.")], "t"))
            .collect();
        write_bundle(&bundle, &dir.path().join("in")).unwrap();
        let s = cmd_augment(
            &dir.path().join("in"),
            Strategy::Local,
            &BackendConfig::default(),
            &AugmentConfig::default(),
            &dir.path().join("out"),
        )
        .unwrap();
        assert_eq!(s.requests, 10);
    }

    #[test]
    fn missing_bundle_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = cmd_split(&dir.path().join("absent"), SplitMode::Independent, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

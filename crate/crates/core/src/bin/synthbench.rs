//! Command-line entry point: `gen`, `split`, `augment`, `eval`, `report`.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use synthbench::eval::{EvalMode, Normalization};
use synthbench::pipeline::{self, BackendKind, GenFamily, PipelineError, RunConfig};
use synthbench::transform::{SplitMode, Strategy};

/// stdout writes that ignore a closed pipe
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "synthbench", version, about = "Seeded synthetic knowledge benchmarks: generate, split, augment, evaluate")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `mock` (offline) or `http`.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Persistent response cache directory.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Base URL of the HTTP backend.
    #[arg(long, global = true)]
    endpoint: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark bundle.
    Gen {
        /// simple-reversals, simple-syllogisms, celebrity, semantic or derivatoids
        family: String,
    },
    /// Split training documents into examples.
    Split {
        bundle: PathBuf,
        /// independent or cumulative
        #[arg(long)]
        mode: Option<String>,
    },
    /// Augment the training corpus with model-written statements.
    Augment {
        bundle: PathBuf,
        /// local, document or global
        #[arg(long)]
        strategy: String,
        /// Subsampling factor for the global context.
        #[arg(long)]
        factor: Option<usize>,
    },
    /// Score the bundle's test splits.
    Eval {
        bundle: PathBuf,
        /// bare or icl
        #[arg(long)]
        mode: Option<String>,
        /// Split to score; repeatable. All splits by default.
        #[arg(long = "split")]
        splits: Vec<String>,
        /// Subsampling factor for the in-context corpus.
        #[arg(long)]
        factor: Option<usize>,
        /// none or per-token
        #[arg(long)]
        normalize: Option<String>,
    },
    /// Print tables for evaluation directories.
    Report { dirs: Vec<PathBuf> },
}

fn usage(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Usage(e.to_string())
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T, PipelineError>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(usage)
}

fn out_dir(global: &Global) -> Result<PathBuf, PipelineError> {
    global.out.clone().ok_or_else(|| usage("--out is required"))
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(b) = &g.backend {
        cfg.backend.kind = parse::<BackendKind>(b)?;
    }
    if g.cache_dir.is_some() {
        cfg.backend.cache_dir = g.cache_dir.clone();
    }
    if g.endpoint.is_some() {
        cfg.backend.endpoint = g.endpoint.clone();
    }

    match cli.command {
        Command::Gen { family } => {
            let family: GenFamily = family.parse()?;
            let out = out_dir(g)?;
            let manifest = pipeline::cmd_gen(family, &cfg.gen, cfg.seed, &out)?;
            out!("wrote {} files to {}\n", manifest.files.len(), out.display());
        }
        Command::Split { bundle, mode } => {
            let mode = match mode.as_deref() {
                Some("independent") => SplitMode::Independent,
                Some("cumulative") => SplitMode::Cumulative,
                Some(other) => return Err(usage(format!("unknown split mode `{other}`"))),
                None => cfg.split.mode,
            };
            let out = out_dir(g)?;
            pipeline::cmd_split(&bundle, mode, &out)?;
            out!("wrote {}\n", out.join("examples.jsonl").display());
        }
        Command::Augment { bundle, strategy, factor } => {
            let strategy: Strategy = parse(&strategy)?;
            let mut aug = cfg.augment.clone();
            aug.seed = cfg.seed;
            if let Some(f) = factor {
                aug.subsample_factor = f;
            }
            let summary = pipeline::cmd_augment(&bundle, strategy, &cfg.backend, &aug, &out_dir(g)?)?;
            out!(
                "{}: {} requests ({} to the backend), {} statements added, {} duplicates dropped\n",
                summary.strategy, summary.requests, summary.backend_calls, summary.added, summary.duplicates_dropped
            );
            if summary.failures > 0 {
                for (error, n) in &summary.failure_kinds {
                    eprintln!("{n} x {error}");
                }
                return Err(PipelineError::Runtime(format!("{} augmentation jobs failed", summary.failures)));
            }
        }
        Command::Eval { bundle, mode, splits, factor, normalize } => {
            let mut ev = cfg.eval.clone();
            ev.seed = cfg.seed;
            if let Some(m) = mode {
                ev.mode = parse::<EvalMode>(&m)?;
            }
            if !splits.is_empty() {
                ev.splits = splits;
            }
            if let Some(f) = factor {
                ev.factor = f;
            }
            if let Some(n) = normalize {
                ev.normalization = parse::<Normalization>(&n)?;
            }
            let (report, stats) = pipeline::cmd_eval(&bundle, &cfg.backend, &ev, &out_dir(g)?)?;
            out!("{}", synthbench::eval::render_table(&report));
            out!("{} requests, {} backend calls, {} ms\n", stats.requests, stats.backend_calls, stats.runtime_ms);
        }
        Command::Report { dirs } => out!("{}", pipeline::cmd_report(&dirs)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

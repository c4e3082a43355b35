//! gen -> split -> augment -> eval -> report on the offline mock, as the
//! command-line tool runs it. Outputs go to a temporary directory unless a
//! path is given.
//!
//!     cargo run --release --example full_pipeline [OUT_DIR]

use std::path::PathBuf;

use synthbench::eval::{EvalConfig, EvalMode};
use synthbench::pipeline::{self, BackendConfig, GenConfig, GenFamily};
use synthbench::transform::{AugmentConfig, SplitMode, Strategy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| tmp.path().to_path_buf());
    let backend = BackendConfig::default();

    let bundle = root.join("reversals");
    let manifest = pipeline::cmd_gen(GenFamily::SimpleReversals, &GenConfig::default(), 0, &bundle)?;
    println!("gen: {} files, config {}", manifest.files.len(), &manifest.config_hash[..12]);

    pipeline::cmd_split(&bundle, SplitMode::Cumulative, &root.join("split"))?;
    let aug = root.join("augmented");
    let summary = pipeline::cmd_augment(&bundle, Strategy::Document, &backend, &AugmentConfig::default(), &aug)?;
    println!("augment: {} requests, {} added", summary.requests, summary.added);

    let mut dirs = Vec::new();
    for (name, dir) in [("original", &bundle), ("augmented", &aug)] {
        for mode in [EvalMode::Bare, EvalMode::Icl] {
            let out = root.join(format!("eval-{name}-{mode:?}").to_lowercase());
            let (_, stats) = pipeline::cmd_eval(dir, &backend, &EvalConfig { mode, ..EvalConfig::default() }, &out)?;
            println!("eval {name} {mode:?}: {} ms", stats.runtime_ms);
            dirs.push(out);
        }
    }
    print!("\n{}", pipeline::cmd_report(&dirs)?);
    Ok(())
}

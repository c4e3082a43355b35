//! Local, document and global augmentation against the offline mock, with
//! a persistent response cache: the second pass makes no backend calls.
//!
//!     cargo run --example augmentation

use std::sync::Arc;

use synthbench::datasets::Document;
use synthbench::kg::PatternRewriter;
use synthbench::lm_client::{Client, MemoryMock, ResponseCache, Rewriter};
use synthbench::transform::{augment_corpus, prompts, AugmentConfig, Strategy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = vec![
        Document::new("d0", vec!["zorps are taller than blims.".into(), "blims eat wugs.".into()], "note"),
        Document::new("d1", vec!["feps are taller than zorps.".into()], "note"),
    ];
    let rewriter: Arc<dyn Rewriter> = Arc::new(PatternRewriter::new([
        ("{A} are taller than {B}", "{B} are shorter than {A}"),
        ("{A} eat {B}", "{B} are eaten by {A}"),
    ]));
    let cache_dir = tempfile::tempdir()?;

    println!("local prompt:\n{}\n", prompts::local_prompt(&docs[0].sentences[0]));
    for pass in 1..=2 {
        let cache = ResponseCache::on_disk(cache_dir.path())?;
        let client = Client::new(Arc::new(MemoryMock::empty(Some(rewriter.clone())))).with_cache(Some(cache));
        for strategy in [Strategy::Local, Strategy::Document, Strategy::Global] {
            let config = AugmentConfig { subsample_factor: 1, ..AugmentConfig::default() };
            let out = augment_corpus(&docs, strategy, &client, &config)?;
            if pass == 1 {
                for d in &out.docs[docs.len()..] {
                    let p = d.provenance.as_ref().expect("augmented");
                    println!("{:>8} {:<10} {}  (prompt {})", strategy.name(), p.target_id, d.text(), &p.prompt_hash[..12]);
                }
            }
        }
        let s = client.stats();
        println!("pass {pass}: {} requests, {} backend calls, {} cache hits\n", s.requests, s.backend_calls, s.cache_hits);
    }
    Ok(())
}

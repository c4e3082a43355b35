//! Builds the nonsense-word semantic hierarchy, its deductive closure and
//! the generated corpus, then shows one test item per split.
//!
//!     cargo run --release --example semantic_structure

use synthbench::datasets::{default_holdouts, gen_semantic_corpus, SemanticConfig};
use synthbench::kg::taxonomy::semantic_kb;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (kb, lexicon) = semantic_kb(0)?;
    let closure = kb.closure()?;
    println!("{} concepts, {} stated facts, {} in the closure", kb.concepts.len(), kb.facts.len(), closure.len());

    let dog = kb.find(lexicon.word("noun:dogs")).ok_or("no dog in the hierarchy")?;
    let chain: Vec<&str> = kb.ancestors(dog).iter().map(|&a| kb.concept(a).surface.as_str()).collect();
    println!("dog is `{}`, under {}", kb.concept(dog).surface, chain.join(" < "));

    let holdouts = default_holdouts(&kb, 10, 0);
    let config = SemanticConfig { n_docs: 400, ..SemanticConfig::default() };
    let corpus = gen_semantic_corpus(&kb, &config, &holdouts, 0)?;
    println!("\nfirst document:\n{}\n", corpus.bundle.train[0].text());

    for (split, items) in &corpus.bundle.tests {
        let item = &items[0];
        println!("[{split}] {} items; e.g. {}", items.len(), item.question);
        for (i, c) in item.candidates.iter().enumerate() {
            let mark = if i == item.correct_index { "*" } else { " " };
            println!("   {mark} {c}");
        }
    }
    Ok(())
}

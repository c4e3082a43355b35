//! The fictional celebrities set, and the same bundle with every name
//! replaced by nonsense words (and mapped back).
//!
//!     cargo run --example celebrity_names

use synthbench::datasets::{apply_name_map, gen_celebrity_reversal, name_lexicon, nonsensify_names, CelebrityConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = gen_celebrity_reversal(&CelebrityConfig::default(), 0)?;
    let item = &bundle.tests["reversals"][0];
    println!("{} train examples; first: {}", bundle.train.len(), bundle.train[0].text());
    println!("test: {} ... {:?} (answer {})\n", item.question, item.candidates, item.correct_index);

    let lexicon = name_lexicon(&bundle, 1)?;
    let (nonsense, map) = nonsensify_names(&bundle, &lexicon)?;
    let (real, fake) = map.0.iter().next().expect("at least one person");
    println!("{real} -> {fake}");
    println!("first example: {}", nonsense.train[0].text());

    let restored = apply_name_map(&nonsense, &map.inverse());
    println!("round trip restores the corpus: {}", restored.train == bundle.train);
    Ok(())
}

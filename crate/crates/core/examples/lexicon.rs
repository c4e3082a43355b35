//! Nonsense vocabulary: pronounceable, collision-free, never an English
//! word, and fully determined by the seed.
//!
//!     cargo run --example lexicon

use synthbench::lexicon::{build_lexicon, english_wordlist, PhonemeInventory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inventory = PhonemeInventory::default();
    println!("inventory admits {} words", inventory.capacity());

    let terms: Vec<String> = ["dog", "mammal", "animal", "fur", "bark"].iter().map(|s| s.to_string()).collect();
    for seed in [0, 1] {
        let lex = build_lexicon(&terms, &inventory, seed)?;
        let words: Vec<String> = terms.iter().map(|t| format!("{t}={}", lex.word(t))).collect();
        println!("seed {seed}: {}", words.join(" "));
        assert!(terms.iter().all(|t| !english_wordlist().contains(lex.word(t))));
    }
    println!("\n{}", build_lexicon(&terms, &inventory, 0)?.to_json());
    Ok(())
}

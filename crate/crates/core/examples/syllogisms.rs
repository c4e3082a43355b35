//! Simple syllogisms: premises, the six candidate conclusions and which of
//! them the finite-model checker finds entailed.
//!
//!     cargo run --example syllogisms

use synthbench::datasets::{gen_simple_syllogisms, gen_syllogism_items};
use synthbench::kg::{ModelChecker, Semantics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = gen_simple_syllogisms(69, 0)?;
    let doc = &bundle.train[0];
    let item = &bundle.tests["syllogisms"][0];
    println!("{}\n\n{}", doc.text(), item.question);
    for (i, c) in item.candidates.iter().enumerate() {
        println!("  {} {c}", if i == item.correct_index { "*" } else { " " });
    }

    let items = gen_syllogism_items(69, ModelChecker::default(), 0)?;
    let mut figures = [0; 4];
    for it in &items {
        figures[it.figure as usize - 1] += 1;
    }
    println!("\n{} items; per figure {figures:?}", items.len());

    // with existential import more conclusions follow, so fewer premise
    // pairs have a unique answer
    let strict = ModelChecker::new(4, Semantics::ExistentialImport)?;
    match gen_syllogism_items(69, strict, 0) {
        Ok(v) => println!("existential import: {} items", v.len()),
        Err(e) => println!("existential import: {e}"),
    }
    Ok(())
}

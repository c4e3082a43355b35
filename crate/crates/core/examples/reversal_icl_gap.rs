//! Bare versus in-context scoring of the simple reversals with the offline
//! memorising mock. The mock has read every training sentence, but only
//! recognises a reversed statement when the original is in its prompt.
//!
//!     cargo run --release --example reversal_icl_gap

use std::sync::Arc;

use synthbench::datasets::{gen_simple_reversals, reversal_rewriter, ReversalConfig};
use synthbench::eval::{evaluate_bundle, render_table, EvalConfig, EvalMode};
use synthbench::lm_client::{Client, MemoryMock};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ReversalConfig { n_comparisons: 300, ..ReversalConfig::default() };
    let bundle = gen_simple_reversals(&config, 0)?;
    let mock = MemoryMock::new(bundle.train.iter().map(|d| d.text()), Some(Arc::new(reversal_rewriter())));
    let client = Client::new(Arc::new(mock));

    for mode in [EvalMode::Bare, EvalMode::Icl] {
        let (report, records) = evaluate_bundle(&bundle, &client, &EvalConfig { mode, ..EvalConfig::default() })?;
        println!("== {mode:?} ==");
        print!("{}", render_table(&report));
        let r = &records[0];
        println!("first item logprobs {:?}, chose {}, correct {}\n", r.logprobs, r.chosen_index, r.correct_index);
    }
    Ok(())
}

//! Generation scoring for process tasks: the answer is pulled out of the
//! completion and compared to the reference with ROUGE-L.
//!
//!     cargo run --example rouge_generation

use std::sync::Arc;

use synthbench::derivatoid::{gen_process_split, icl_prompt, SplitSpec};
use synthbench::eval::{evaluate_generation, rouge_l, tokenize};
use synthbench::lm_client::{CharMock, Client};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = "(64**x) * (log(x, 39)) + (log39log39(x)) * (x**64)";
    let guess = "(64**x) * (log(x, 39)) + (log39(x)) * (x**64)";
    println!("{:?}", tokenize(guess));
    println!("ROUGE-L {:.3}\n", rouge_l(guess, reference));

    // a canned model: right on the first query, swaps operands on the second
    let split = gen_process_split(&SplitSpec { n_test: 2, ..SplitSpec::default() }, 0)?;
    let mut mock = CharMock::default();
    let mut jobs = Vec::new();
    for (i, ex) in split.test.iter().enumerate() {
        let prompt = icl_prompt(&split.train, &ex.input);
        let answer = if i == 0 {
            ex.output.clone()
        } else {
            let (a, b) = ex.output.split_once(" + ").unwrap_or((&ex.output, ""));
            format!("{b} + {a}")
        };
        mock = mock.with_fixture(prompt.clone(), format!("Answer: {answer}."));
        jobs.push((format!("test-{i}"), prompt, ex.output.clone(), "exp x log".to_string()));
    }
    let (report, records) = evaluate_generation(&jobs, &Client::new(Arc::new(mock)), 2)?;
    for r in &records {
        println!("{}: {:.3}  {}", r.item_id, r.rouge_l, r.answer);
    }
    println!("mean ROUGE-L {:.3}", report.accuracy);
    Ok(())
}

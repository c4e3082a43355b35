//! The derivatoid rewrite process: one worked expression, a k-shot prompt
//! for a held-out combination, and the reflection variants.
//!
//!     cargo run --example derivatoids

use synthbench::derivatoid::{
    derivatoid, gen_process_split, icl_prompt, parse, reflect, render, response, ReflectionMode, SplitSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = "(log(x, 39)) * (64**x)";
    let e = parse(input)?;
    println!("{input}\n  -> {}\n", render(&derivatoid(&e)));

    // train on exp*poly and log*trig, test on exp*log
    let split = gen_process_split(&SplitSpec::default(), 7)?;
    let query = &split.test[0];
    println!("--- 8-shot prompt ---\n{}\n", icl_prompt(&split.train, &query.input));
    println!("expected: {}\n", query.output);

    let e = parse("(35**x) * (sin(x))")?;
    for mode in [ReflectionMode::BeforeAnswer, ReflectionMode::NonsenseMapped, ReflectionMode::RandomMath] {
        println!("{mode:?}: {}", reflect(&e, mode, 3)?);
    }

    let spec = SplitSpec { reflection: Some(ReflectionMode::AfterAnswer), k: 2, ..SplitSpec::default() };
    let reflected = gen_process_split(&spec, 7)?;
    println!("\nreflection after the answer:\n{}", response(&reflected.train[0]));
    Ok(())
}

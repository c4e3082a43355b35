//! Scoring against a served model over HTTP. Needs an endpoint that
//! answers `POST /complete` and `POST /score`:
//!
//!     SYNTHBENCH_ENDPOINT=http://localhost:8000 cargo run --example http_backend
//!
//! Responses are cached on disk, so a rerun is free.

use std::sync::Arc;

use synthbench::lm_client::{Client, HttpBackend, ResponseCache, RetryPolicy, ScoreRequest, ENDPOINT_ENV};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let backend = match HttpBackend::from_env() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{e}\nset {ENDPOINT_ENV} to run this example");
            return Ok(());
        }
    };
    let cache = ResponseCache::on_disk(std::env::temp_dir().join("synthbench-cache"))?;
    let client = Client::new(Arc::new(backend))
        .with_cache(Some(cache))
        .with_retry(RetryPolicy::exponential(3, std::time::Duration::from_secs(1)));

    let prompt = "Did you know that";
    for c in [" zorps are brighter than blims", " blims are brighter than zorps"] {
        let s = client.score(&ScoreRequest::new(prompt, c))?;
        println!("{c:>32}: {:.3} over {} tokens", s.total_logprob, s.token_count);
    }
    println!("{:?}", client.stats());
    Ok(())
}

//! Language-model access: completions and continuation log-likelihoods.
//!
//! A [`Client`] wraps any [`Backend`] with a content-addressed response
//! cache and a retry policy. Log-probabilities are natural logs.

mod cache;
mod http;
mod mock;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use cache::ResponseCache;
pub use http::{HttpBackend, ENDPOINT_ENV, KEY_ENV};
pub use mock::{normalize_text, CharMock, MemoryMock};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum LmError {
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("operation not supported by backend `{0}`")]
    UnsupportedByBackend(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("cache error: {0}")]
    Cache(String),
}

impl LmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LmError::Timeout(_) | LmError::RateLimited(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    /// Caller annotations. Part of the cache key, never sent over the wire.
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>) -> Self {
        Self { prompt: prompt.into(), max_tokens: 1024, temperature: 0.0, metadata: BTreeMap::new() }
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn validate(&self) -> Result<(), LmError> {
        if self.prompt.is_empty() {
            return Err(LmError::InvalidRequest("prompt is empty".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(LmError::InvalidRequest(format!("temperature {} is negative", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub prompt: String,
    pub continuation: String,
}

impl ScoreRequest {
    pub fn new(prompt: impl Into<String>, continuation: impl Into<String>) -> Self {
        Self { prompt: prompt.into(), continuation: continuation.into() }
    }

    pub fn validate(&self) -> Result<(), LmError> {
        if self.continuation.is_empty() {
            return Err(LmError::InvalidRequest("continuation is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredCompletion {
    pub total_logprob: f64,
    pub token_count: u32,
}

pub trait Backend: Send + Sync {
    /// Stable identifier; part of every cache key.
    fn id(&self) -> String;
    fn complete(&self, req: &CompletionRequest) -> Result<String, LmError>;
    fn score(&self, req: &ScoreRequest) -> Result<ScoredCompletion, LmError>;
}

/// Produces statements equivalent to a sentence, e.g. its reversal.
pub trait Rewriter: Send + Sync {
    fn rewrites(&self, sentence: &str) -> Vec<String>;
}

pub type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// Exponential backoff for retryable errors. The default waits 1s, 2s and
/// 4s, then gives up.
#[derive(Clone)]
pub struct RetryPolicy {
    pub delays: Vec<Duration>,
    pub sleeper: Sleeper,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self::exponential(3, Duration::from_secs(1))
    }
}

impl std::fmt::Debug for RetryPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RetryPolicy").field("delays", &self.delays).finish_non_exhaustive()
    }
}

impl RetryPolicy {
    pub fn exponential(retries: u32, first: Duration) -> Self {
        Self { delays: (0..retries).map(|i| first * 2u32.pow(i)).collect(), sleeper: Arc::new(std::thread::sleep) }
    }

    pub fn none() -> Self {
        Self::exponential(0, Duration::ZERO)
    }

    pub fn with_sleeper(mut self, sleeper: Sleeper) -> Self {
        self.sleeper = sleeper;
        self
    }

    pub fn run<T>(&self, mut attempt: impl FnMut() -> Result<T, LmError>) -> Result<T, LmError> {
        let mut delays = self.delays.iter();
        loop {
            match attempt() {
                Err(e) if e.is_retryable() => match delays.next() {
                    Some(d) => {
                        log::warn!("{e}; retrying in {d:?}");
                        (self.sleeper)(*d);
                    }
                    None => return Err(e),
                },
                other => return other,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClientStats {
    pub requests: u64,
    pub backend_calls: u64,
    pub cache_hits: u64,
}

/// Thread-safe front end: validation, caching, in-flight de-duplication and
/// retries around a backend.
pub struct Client {
    backend: Arc<dyn Backend>,
    cache: Option<ResponseCache>,
    retry: RetryPolicy,
    requests: AtomicU64,
    backend_calls: AtomicU64,
    cache_hits: AtomicU64,
}

impl Client {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self {
            backend,
            cache: Some(ResponseCache::in_memory()),
            retry: RetryPolicy::default(),
            requests: AtomicU64::new(0),
            backend_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        }
    }

    pub fn with_cache(mut self, cache: Option<ResponseCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn backend_id(&self) -> String {
        self.backend.id()
    }

    pub fn stats(&self) -> ClientStats {
        ClientStats {
            requests: self.requests.load(Ordering::Relaxed),
            backend_calls: self.backend_calls.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }

    pub fn complete(&self, req: &CompletionRequest) -> Result<String, LmError> {
        req.validate()?;
        let bytes = self.cached("complete", req, || self.backend.complete(req).map(String::into_bytes))?;
        String::from_utf8(bytes).map_err(|e| LmError::Cache(e.to_string()))
    }

    pub fn score(&self, req: &ScoreRequest) -> Result<ScoredCompletion, LmError> {
        req.validate()?;
        let bytes = self.cached("score", req, || {
            let scored = self.backend.score(req)?;
            Ok(serde_json::to_vec(&scored).expect("scores serialize"))
        })?;
        serde_json::from_slice(&bytes).map_err(|e| LmError::Cache(e.to_string()))
    }

    fn cached(
        &self,
        op: &str,
        req: &impl Serialize,
        call: impl Fn() -> Result<Vec<u8>, LmError>,
    ) -> Result<Vec<u8>, LmError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let fetch = || {
            self.backend_calls.fetch_add(1, Ordering::Relaxed);
            self.retry.run(&call)
        };
        let Some(cache) = &self.cache else {
            return fetch();
        };
        let mut key_bytes = self.backend.id().into_bytes();
        key_bytes.push(0);
        key_bytes.extend_from_slice(op.as_bytes());
        key_bytes.push(0);
        key_bytes.extend(serde_json::to_vec(req).expect("requests serialize"));
        let key = crate::hashing::sha256_hex(&key_bytes);
        let (bytes, hit) = cache.get_or_insert_with(&key, fetch)?;
        if hit {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
        }
        Ok(bytes)
    }
}

use std::time::Duration;

use serde::{Deserialize, Serialize};
use ureq::Agent;

use super::{Backend, CompletionRequest, LmError, ScoreRequest, ScoredCompletion};

pub const ENDPOINT_ENV: &str = "SYNTHBENCH_ENDPOINT";
pub const KEY_ENV: &str = "SYNTHBENCH_API_KEY";

/// JSON-over-HTTP backend.
///
/// `POST {endpoint}/complete` with `{"prompt","max_tokens","temperature"}`
/// answers `{"text"}`; `POST {endpoint}/score` with
/// `{"prompt","continuation"}` answers `{"logprob","tokens"}`. Vendor APIs
/// plug in behind a small adapter service speaking this protocol.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    endpoint: String,
    api_key: Option<String>,
    agent: Agent,
}

#[derive(Serialize)]
struct CompleteBody<'a> {
    prompt: &'a str,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct CompleteReply {
    text: String,
}

#[derive(Deserialize)]
struct ScoreReply {
    logprob: f64,
    tokens: u32,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent: Agent =
            Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build().into();
        Self { endpoint: endpoint.into().trim_end_matches('/').to_string(), api_key, agent }
    }

    /// Reads the endpoint and optional bearer token from the environment.
    pub fn from_env() -> Result<Self, LmError> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .map_err(|_| LmError::InvalidRequest(format!("{ENDPOINT_ENV} is not set")))?;
        Ok(Self::new(endpoint, std::env::var(KEY_ENV).ok(), Duration::from_secs(120)))
    }

    fn post<T: for<'de> Deserialize<'de>>(&self, path: &str, body: impl Serialize) -> Result<T, LmError> {
        let url = format!("{}/{path}", self.endpoint);
        let mut req = self.agent.post(&url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| match e {
            ureq::Error::Timeout(_) => LmError::Timeout(url.clone()),
            other => LmError::Backend(format!("{url}: {other}")),
        })?;
        match resp.status().as_u16() {
            200..=299 => resp.body_mut().read_json().map_err(|e| LmError::Backend(format!("{url}: {e}"))),
            429 => Err(LmError::RateLimited(url)),
            408 | 504 => Err(LmError::Timeout(url)),
            404 | 501 => Err(LmError::UnsupportedByBackend(self.id())),
            code => Err(LmError::Backend(format!("{url}: HTTP {code}"))),
        }
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> String {
        format!("http-{}", self.endpoint)
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, LmError> {
        let body = CompleteBody { prompt: &req.prompt, max_tokens: req.max_tokens, temperature: req.temperature };
        self.post::<CompleteReply>("complete", body).map(|r| r.text)
    }

    fn score(&self, req: &ScoreRequest) -> Result<ScoredCompletion, LmError> {
        let reply: ScoreReply = self.post("score", req)?;
        Ok(ScoredCompletion { total_logprob: reply.logprob, token_count: reply.tokens })
    }
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    use super::*;

    /// Serves one canned response per connection and returns the requests
    /// it saw (request line plus body).
    fn serve(responses: Vec<(u16, &'static str)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = format!("http://{}", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let mut seen = Vec::new();
            for (status, body) in responses {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                let mut length = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap();
                    }
                }
                let mut payload = vec![0; length];
                reader.read_exact(&mut payload).unwrap();
                seen.push(format!("{}{}", request_line.trim(), String::from_utf8(payload).unwrap()));
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
            seen
        });
        (addr, handle)
    }

    #[test]
    fn wire_protocol_round_trip() {
        let (addr, handle) = serve(vec![(200, r#"{"text":"hi"}"#), (200, r#"{"logprob":-1.5,"tokens":2}"#)]);
        let backend = HttpBackend::new(addr, None, Duration::from_secs(5));
        assert_eq!(backend.complete(&CompletionRequest::new("hello")).unwrap(), "hi");
        let scored = backend.score(&ScoreRequest::new("q", "a b")).unwrap();
        assert_eq!(scored, ScoredCompletion { total_logprob: -1.5, token_count: 2 });
        let seen = handle.join().unwrap();
        let body = |s: &str| -> serde_json::Value { serde_json::from_str(&s[s.find('{').unwrap()..]).unwrap() };
        assert!(seen[0].starts_with("POST /complete"));
        assert_eq!(body(&seen[0]), serde_json::json!({"prompt": "hello", "max_tokens": 1024, "temperature": 0.0}));
        assert!(seen[1].starts_with("POST /score"));
        assert_eq!(body(&seen[1]), serde_json::json!({"prompt": "q", "continuation": "a b"}));
    }

    #[test]
    fn status_codes_map_to_errors() {
        let (addr, handle) = serve(vec![(429, "{}"), (404, "{}"), (500, "{}")]);
        let backend = HttpBackend::new(addr, None, Duration::from_secs(5));
        let req = CompletionRequest::new("x");
        assert!(matches!(backend.complete(&req), Err(LmError::RateLimited(_))));
        assert!(matches!(backend.complete(&req), Err(LmError::UnsupportedByBackend(_))));
        assert!(matches!(backend.complete(&req), Err(LmError::Backend(_))));
        handle.join().unwrap();
    }
}

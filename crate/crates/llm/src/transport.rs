//! Chat-completion transports.
//!
//! [`HttpTransport`] speaks the OpenAI-compatible `/chat/completions` wire
//! shape. [`MockTransport`] answers from the prompt itself so the pipeline
//! can be exercised without a network; it also records how many requests
//! were in flight at once.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use cohere_core::hash::{derive_seed, sha256_hex};
use cohere_core::model::consistency_oracle_text;
use cohere_core::SignedGraph;

use crate::config::EndpointConfig;
use crate::prompt::{extract_practical_labels, extract_propositions};
use crate::{LlmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: Option<f64>,
    /// Attempt index. Not sent over the wire; mocks use it to vary answers.
    pub nonce: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    /// Worth retrying: timeouts, connection failures, 429 and 5xx.
    #[error("transient: {0}")]
    Transient(String),
    #[error("fatal: {0}")]
    Fatal(String),
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Builds the transport named by `config.base_url`.
pub fn from_config(config: &EndpointConfig) -> Result<Box<dyn Transport>> {
    config.validate()?;
    if config.is_mock() {
        return Ok(Box::new(MockTransport::from_url(&config.base_url)?));
    }
    let key = config.resolve_api_key()?;
    Ok(Box::new(HttpTransport::new(config, &key)))
}

pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    headers: Vec<(String, String)>,
}

impl HttpTransport {
    pub fn new(config: &EndpointConfig, api_key: &str) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            url: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            headers: config.resolved_headers(api_key),
        }
    }
}

pub fn request_body(request: &ChatRequest) -> Value {
    let mut body = json!({
        "model": request.model,
        "messages": [{"role": "user", "content": request.prompt}],
    });
    if let Some(t) = request.temperature {
        body["temperature"] = json!(t);
    }
    body
}

/// Pulls `choices[0].message.content` out of a completion response.
pub fn response_content(body: &Value) -> Result<String, TransportError> {
    body.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| TransportError::Fatal("response has no choices[0].message.content".into()))
}

pub fn classify_status(status: u16, body: &str) -> TransportError {
    let snippet: String = body.chars().take(200).collect();
    let msg = format!("HTTP {status}: {snippet}");
    if status == 429 || status >= 500 {
        TransportError::Transient(msg)
    } else {
        TransportError::Fatal(msg)
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut req = self.agent.post(&self.url);
        for (k, v) in &self.headers {
            req = req.header(k.as_str(), v.as_str());
        }
        let mut resp = req.send_json(request_body(request)).map_err(|e| match e {
            ureq::Error::StatusCode(s) => classify_status(s, ""),
            ureq::Error::BadUri(_) | ureq::Error::InvalidProxyUrl => TransportError::Fatal(e.to_string()),
            other => TransportError::Transient(other.to_string()),
        })?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Transient(format!("reading body: {e}")))?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &text));
        }
        let body: Value =
            serde_json::from_str(&text).map_err(|e| TransportError::Fatal(format!("invalid JSON response: {e}")))?;
        response_content(&body)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MockKind {
    /// Emits the graph implied by the prompt's propositions.
    Oracle,
    /// The oracle graph with every sign flipped.
    Inverted,
    /// The oracle graph with each sign flipped with probability `flip`,
    /// independently per attempt.
    Noisy { flip: f64 },
    /// Oracle edges plus one edge to a vertex not in the prompt.
    Hallucinate,
    /// No edge list at all.
    Prose,
    /// Always the given text.
    Fixed(String),
    /// Fails transiently for the first `failures` calls, then acts as the oracle.
    Flaky { failures: usize },
    /// Always fails transiently.
    Down,
    /// Always fails with an authorization error.
    Unauthorized,
}

#[derive(Debug, Default)]
pub struct MockStats {
    calls: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

impl MockStats {
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }
}

pub struct MockTransport {
    pub kind: MockKind,
    /// Simulated latency per call.
    pub delay: Duration,
    stats: Arc<MockStats>,
}

impl MockTransport {
    pub fn new(kind: MockKind) -> Self {
        Self { kind, delay: Duration::ZERO, stats: Arc::default() }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn stats(&self) -> Arc<MockStats> {
        Arc::clone(&self.stats)
    }

    /// Parses `mock://<kind>[?key=value&...]`. Keys: `flip`, `failures`,
    /// `delay_ms`, `text` (for `fixed`; `%20` style escapes are not decoded).
    pub fn from_url(url: &str) -> Result<Self> {
        let rest = url
            .strip_prefix("mock://")
            .ok_or_else(|| LlmError::Config(format!("`{url}` is not a mock URL")))?;
        let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
        let mut params = std::collections::BTreeMap::new();
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| LlmError::Config(format!("bad mock parameter `{pair}`")))?;
            params.insert(k, v);
        }
        let num = |key: &str, default: f64| -> Result<f64> {
            params.get(key).map_or(Ok(default), |v| {
                v.parse().map_err(|_| LlmError::Config(format!("mock parameter {key}=`{v}` is not a number")))
            })
        };
        let kind = match name.trim_end_matches('/') {
            "oracle" => MockKind::Oracle,
            "inverted" => MockKind::Inverted,
            "noisy" => {
                let flip = num("flip", 0.1)?;
                if !(0.0..=1.0).contains(&flip) {
                    return Err(LlmError::Config(format!("flip {flip} outside [0, 1]")));
                }
                MockKind::Noisy { flip }
            }
            "hallucinate" => MockKind::Hallucinate,
            "prose" => MockKind::Prose,
            "fixed" => MockKind::Fixed(params.get("text").copied().unwrap_or("[]").to_string()),
            "flaky" => MockKind::Flaky { failures: num("failures", 2.0)? as usize },
            "down" => MockKind::Down,
            "unauthorized" => MockKind::Unauthorized,
            other => return Err(LlmError::Config(format!("unknown mock kind `{other}`"))),
        };
        let delay = Duration::from_millis(num("delay_ms", 0.0)? as u64);
        Ok(Self::new(kind).with_delay(delay))
    }

    fn answer(&self, request: &ChatRequest, call: usize) -> Result<String, TransportError> {
        let seed = u64::from_str_radix(&sha256_hex(&request.prompt)[..16], 16).expect("hex digest");
        let response = |flip: &dyn Fn(usize) -> bool, extra: bool| {
            let graph = oracle_graph(&request.prompt, seed)?;
            let mut edges: Vec<(String, String, f64)> = graph
                .edges()
                .enumerate()
                .map(|(k, (u, v, w))| (u.to_string(), v.to_string(), if flip(k) { -w } else { w }))
                .collect();
            if extra {
                let u = edges.first().map_or("a".to_string(), |e| e.0.clone());
                edges.push((u, "zz_unknown".to_string(), 1.0));
            }
            Ok(render(&request.prompt, &edges))
        };
        match &self.kind {
            MockKind::Oracle => response(&|_| false, false),
            MockKind::Inverted => response(&|_| true, false),
            MockKind::Noisy { flip } => {
                let attempt_seed = derive_seed(seed, request.nonce);
                response(&|k| unit(derive_seed(attempt_seed, k as u64)) < *flip, false)
            }
            MockKind::Hallucinate => response(&|_| false, true),
            MockKind::Prose => Ok("I am unable to determine the consistency of these propositions without more context.".into()),
            MockKind::Fixed(text) => Ok(text.clone()),
            MockKind::Flaky { failures } if call < *failures => {
                Err(TransportError::Transient(format!("simulated outage (call {call})")))
            }
            MockKind::Flaky { .. } => response(&|_| false, false),
            MockKind::Down => Err(TransportError::Transient("simulated outage".into())),
            MockKind::Unauthorized => Err(TransportError::Fatal("HTTP 401: invalid API key".into())),
        }
    }
}

impl Transport for MockTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let call = self.stats.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.stats.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.stats.max_in_flight.fetch_max(now, Ordering::SeqCst);
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let out = self.answer(request, call);
        self.stats.in_flight.fetch_sub(1, Ordering::SeqCst);
        out
    }
}

fn unit(x: u64) -> f64 {
    (x >> 11) as f64 / (1u64 << 53) as f64
}

/// The graph a perfect reader would return for `prompt`. Benchmark prompts
/// use the consistency oracle on the listed propositions; practical prompts
/// get a pseudo-random signed graph over the labels, fixed by `seed`.
pub fn oracle_graph(prompt: &str, seed: u64) -> Result<SignedGraph, TransportError> {
    let props = extract_propositions(prompt);
    let fatal = |e: cohere_core::Error| TransportError::Fatal(format!("mock cannot read prompt: {e}"));
    if !props.is_empty() {
        let mut g = SignedGraph::new(props.keys().cloned()).map_err(fatal)?;
        let entries: Vec<(&String, &String)> = props.iter().collect();
        for (i, (u, a)) in entries.iter().enumerate() {
            for (v, b) in &entries[i + 1..] {
                let w = consistency_oracle_text(a, b).map_err(fatal)?;
                if w != 0 {
                    g.add_edge(u, v, f64::from(w)).map_err(fatal)?;
                }
            }
        }
        return Ok(g);
    }
    let labels = extract_practical_labels(prompt);
    if labels.len() < 2 {
        return Err(TransportError::Fatal("mock found no propositions in prompt".into()));
    }
    let mut g = SignedGraph::new(labels.iter().cloned()).map_err(fatal)?;
    let mut k = 0;
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let r = derive_seed(seed, k);
            k += 1;
            if unit(r) < 0.5 {
                let w = if r & 1 == 0 { 1.0 } else { -1.0 };
                g.add_edge(&labels[i], &labels[j], w).map_err(fatal)?;
            }
        }
    }
    Ok(g)
}

/// Renders signed edges in the format the prompt asks for: 0/1 weights for
/// benchmark prompts, 0/10 ratings for practical ones.
fn render(prompt: &str, edges: &[(String, String, f64)]) -> String {
    if !extract_propositions(prompt).is_empty() {
        let items: Vec<String> = edges
            .iter()
            .map(|(u, v, w)| format!("('{u}', '{v}', {})", if *w < 0.0 { 1 } else { 0 }))
            .collect();
        return format!("[{}]", items.join(",\n"));
    }
    let items: Vec<String> = edges
        .iter()
        .map(|(u, v, w)| format!("('{u}', '{v}', {})", if *w < 0.0 { 0 } else { 10 }))
        .collect();
    format!("[{}]", items.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_classification() {
        assert!(matches!(classify_status(429, ""), TransportError::Transient(_)));
        assert!(matches!(classify_status(503, ""), TransportError::Transient(_)));
        assert!(matches!(classify_status(401, "nope"), TransportError::Fatal(_)));
        assert!(matches!(classify_status(400, ""), TransportError::Fatal(_)));
    }

    #[test]
    fn wire_shape() {
        let req = ChatRequest { model: "m".into(), prompt: "hi".into(), temperature: None, nonce: 3 };
        let body = request_body(&req);
        assert_eq!(body, json!({"model": "m", "messages": [{"role": "user", "content": "hi"}]}));
        let req = ChatRequest { temperature: Some(0.2), ..req };
        assert_eq!(request_body(&req)["temperature"], json!(0.2));
        let resp = json!({"choices": [{"message": {"role": "assistant", "content": "[('a', 'b', 0)]"}}]});
        assert_eq!(response_content(&resp).unwrap(), "[('a', 'b', 0)]");
        assert!(response_content(&json!({"choices": []})).is_err());
    }

    #[test]
    fn mock_urls() {
        assert_eq!(MockTransport::from_url("mock://oracle").unwrap().kind, MockKind::Oracle);
        assert_eq!(MockTransport::from_url("mock://noisy?flip=0.25").unwrap().kind, MockKind::Noisy { flip: 0.25 });
        let m = MockTransport::from_url("mock://flaky?failures=1&delay_ms=5").unwrap();
        assert_eq!(m.kind, MockKind::Flaky { failures: 1 });
        assert_eq!(m.delay, Duration::from_millis(5));
        assert!(MockTransport::from_url("mock://nope").is_err());
        assert!(MockTransport::from_url("mock://noisy?flip=2").is_err());
        assert!(MockTransport::from_url("http://x").is_err());
    }
}

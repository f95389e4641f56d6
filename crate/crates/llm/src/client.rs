//! Retrying, concurrency-bounded completion client.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::config::EndpointConfig;
use crate::prompt::PromptBundle;
use crate::transport::{self, ChatRequest, Transport, TransportError};
use crate::{LlmError, Result};

/// Longest single backoff sleep.
pub const MAX_BACKOFF: Duration = Duration::from_secs(60);

pub type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    /// Wall time of the successful request only.
    pub latency_ms: u64,
    /// Requests made, including the successful one.
    pub tries: u32,
}

pub struct Client {
    config: EndpointConfig,
    transport: Arc<dyn Transport>,
    sleeper: Sleeper,
}

/// One unit of work for [`Client::complete_all`].
#[derive(Debug, Clone)]
pub struct Job {
    pub bundle: PromptBundle,
    pub attempt: u64,
}

impl Client {
    /// Client over the transport named by the config (HTTP or `mock://`).
    pub fn from_config(config: EndpointConfig) -> Result<Self> {
        let transport: Arc<dyn Transport> = transport::from_config(&config)?.into();
        Ok(Self::with_transport(config, transport))
    }

    pub fn with_transport(config: EndpointConfig, transport: Arc<dyn Transport>) -> Self {
        Self { config, transport, sleeper: Arc::new(std::thread::sleep) }
    }

    /// Replaces the backoff sleep, e.g. with a recorder in tests.
    pub fn with_sleeper(mut self, sleeper: Sleeper) -> Self {
        self.sleeper = sleeper;
        self
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    pub fn backoff(&self, retry: u32) -> Duration {
        let ms = self.config.backoff_ms.saturating_mul(1u64 << retry.min(20));
        Duration::from_millis(ms).min(MAX_BACKOFF)
    }

    /// Sends one prompt, retrying transient failures up to `max_retries` times.
    pub fn complete(&self, bundle: &PromptBundle, attempt: u64) -> Result<Completion> {
        let request = ChatRequest {
            model: self.config.model.clone(),
            prompt: bundle.text.clone(),
            temperature: self.config.temperature,
            nonce: attempt,
        };
        let mut log = Vec::new();
        for retry in 0..=self.config.max_retries {
            if retry > 0 {
                (self.sleeper)(self.backoff(retry - 1));
            }
            let start = Instant::now();
            match self.transport.send(&request) {
                Ok(text) => {
                    return Ok(Completion {
                        text,
                        latency_ms: start.elapsed().as_millis() as u64,
                        tries: retry + 1,
                    })
                }
                Err(e @ TransportError::Fatal(_)) => {
                    log.push(e.to_string());
                    break;
                }
                Err(e) => log.push(e.to_string()),
            }
        }
        Err(LlmError::Transport { attempts: log })
    }

    /// Runs every job with at most `concurrency` requests in flight and
    /// hands each result to `sink` as soon as it arrives. Results are also
    /// returned in job order.
    pub fn complete_all<F>(&self, jobs: &[Job], sink: F) -> Vec<Result<Completion>>
    where
        F: Fn(&Job, &Result<Completion>) + Sync,
    {
        let next = AtomicUsize::new(0);
        let results: Vec<Mutex<Option<Result<Completion>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
        let workers = self.config.concurrency.min(jobs.len()).max(1);
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(job) = jobs.get(i) else { break };
                    let r = self.complete(&job.bundle, job.attempt);
                    sink(job, &r);
                    *results[i].lock().expect("result slot") = Some(r);
                });
            }
        });
        results
            .into_iter()
            .map(|m| m.into_inner().expect("result slot").expect("every job ran"))
            .collect()
    }
}

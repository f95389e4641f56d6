//! Prompt construction and chat-completion exchange for coherence graph
//! reconstruction.
//!
//! [`transport`] is the only module that talks to the network; everything
//! else is pure or writes to the local response [`store`]. Mock transports
//! (`mock://...` base URLs) make the whole pipeline testable offline.

pub mod client;
pub mod config;
pub mod prompt;
pub mod store;
pub mod transport;

pub use client::{Client, Completion};
pub use config::EndpointConfig;
pub use prompt::{build_benchmark_prompt, build_practical_prompt, PromptBundle, Template};
pub use transport::{ChatRequest, Transport, TransportError};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("request failed after {} attempt(s): {}", .attempts.len(), .attempts.join("; "))]
    Transport { attempts: Vec<String> },

    #[error(transparent)]
    Core(#[from] cohere_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LlmError> = std::result::Result<T, E>;

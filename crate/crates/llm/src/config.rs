//! Endpoint configuration.
//!
//! API keys are never part of the configuration file itself: they come from
//! an environment variable or from a credentials file named in the config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{LlmError, Result};

pub const DEFAULT_KEY_ENV: &str = "OPENAI_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// `https://host/v1` style prefix, or `mock://<kind>` for offline runs.
    pub base_url: String,
    pub model: String,
    /// Extra headers; `{api_key}` in a value is replaced by the key.
    #[serde(default = "default_headers")]
    pub headers: BTreeMap<String, String>,
    /// Left unset to use the provider default.
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Environment variable holding the API key.
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// File whose trimmed content is the API key; takes precedence over the environment.
    #[serde(default)]
    pub credentials_file: Option<PathBuf>,
}

fn default_headers() -> BTreeMap<String, String> {
    BTreeMap::from([("Authorization".to_string(), "Bearer {api_key}".to_string())])
}

fn default_retries() -> u32 {
    3
}

fn default_concurrency() -> usize {
    4
}

fn default_backoff() -> u64 {
    500
}

fn default_timeout() -> u64 {
    120
}

impl EndpointConfig {
    pub fn mock(kind: &str) -> Self {
        Self {
            base_url: format!("mock://{kind}"),
            model: format!("mock-{kind}"),
            headers: default_headers(),
            temperature: None,
            max_retries: default_retries(),
            concurrency: default_concurrency(),
            backoff_ms: 0,
            timeout_secs: default_timeout(),
            api_key_env: None,
            credentials_file: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.trim().is_empty() {
            return Err(LlmError::Config("model must not be empty".into()));
        }
        if self.concurrency == 0 {
            return Err(LlmError::Config("concurrency must be at least 1".into()));
        }
        if !self.is_mock() && !self.base_url.starts_with("http://") && !self.base_url.starts_with("https://") {
            return Err(LlmError::Config(format!("unsupported base_url `{}`", self.base_url)));
        }
        if let Some(t) = self.temperature {
            if !(0.0..=2.0).contains(&t) {
                return Err(LlmError::Config(format!("temperature {t} outside [0, 2]")));
            }
        }
        Ok(())
    }

    pub fn is_mock(&self) -> bool {
        self.base_url.starts_with("mock://")
    }

    /// Reads the API key from the credentials file, else the environment.
    pub fn resolve_api_key(&self) -> Result<String> {
        if let Some(path) = &self.credentials_file {
            let key = std::fs::read_to_string(path)
                .map_err(|e| LlmError::Config(format!("cannot read credentials file {}: {e}", path.display())))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(LlmError::Config(format!("credentials file {} is empty", path.display())));
            }
            return Ok(key.to_string());
        }
        let var = self.api_key_env.as_deref().unwrap_or(DEFAULT_KEY_ENV);
        match std::env::var(var) {
            Ok(k) if !k.trim().is_empty() => Ok(k.trim().to_string()),
            _ => Err(LlmError::Config(format!(
                "no API key: set {var} or point credentials_file at a key file"
            ))),
        }
    }

    /// Headers with `{api_key}` substituted.
    pub fn resolved_headers(&self, api_key: &str) -> Vec<(String, String)> {
        self.headers
            .iter()
            .map(|(k, v)| (k.clone(), v.replace("{api_key}", api_key)))
            .collect()
    }
}

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub max_output_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GenerationParams {
    pub fn new(temperature: f64, max_output_tokens: u32) -> Self {
        GenerationParams {
            temperature,
            max_output_tokens,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("quota or rate limit: {0}")]
    Quota(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Response(String),
    #[error("client configuration: {0}")]
    Config(String),
}

/// A text-completion backend.
pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, ClientError>;

    /// Short identifier recorded in manifests.
    fn name(&self) -> String;
}

impl<C: LlmClient + ?Sized> LlmClient for &C {
    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, ClientError> {
        (**self).complete(prompt, params)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

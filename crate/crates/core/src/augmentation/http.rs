use std::time::Duration;

use serde_json::{json, Value};

use super::client::{ClientError, GenerationParams, LlmClient};

pub const ENDPOINT_ENV: &str = "FEMKIT_LLM_ENDPOINT";
pub const API_KEY_ENV: &str = "FEMKIT_LLM_API_KEY";
pub const MODEL_ENV: &str = "FEMKIT_LLM_MODEL";

const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
const DEFAULT_MODEL: &str = "gpt-3.5-turbo";

/// Chat-completions client for OpenAI-compatible HTTP endpoints.
#[derive(Debug)]
pub struct HttpClient {
    endpoint: String,
    api_key: String,
    model: String,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(
        endpoint: impl Into<String>,
        api_key: impl Into<String>,
        model: impl Into<String>,
    ) -> Result<Self, ClientError> {
        let api_key = api_key.into();
        if api_key.trim().is_empty() {
            return Err(ClientError::Config("empty API key".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ClientError::Config(e.to_string()))?;
        Ok(HttpClient {
            endpoint: endpoint.into(),
            api_key,
            model: model.into(),
            http,
        })
    }

    /// Reads endpoint, key and model from the environment. The key is
    /// required; endpoint and model have defaults.
    pub fn from_env() -> Result<Self, ClientError> {
        let key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| ClientError::Config(format!("{API_KEY_ENV} is not set")))?;
        let endpoint = std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| DEFAULT_ENDPOINT.into());
        let model = std::env::var(MODEL_ENV).unwrap_or_else(|_| DEFAULT_MODEL.into());
        Self::new(endpoint, key, model)
    }
}

impl LlmClient for HttpClient {
    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, ClientError> {
        let mut body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
        });
        if let Some(seed) = params.seed {
            body["seed"] = json!(seed);
        }
        let response = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        if status.as_u16() == 429 {
            return Err(ClientError::Quota(text));
        }
        if !status.is_success() {
            return Err(ClientError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| ClientError::Response(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ClientError::Response("no choices[0].message.content".into()))
    }

    fn name(&self) -> String {
        format!("http({})", self.model)
    }
}

//! Chat-completions client for OpenAI-compatible endpoints.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::provider::{AttemptRequest, Provider, ProviderError};
use super::{Completion, ProviderConfig, SamplingConfig};

/// Retries after the first try; transport errors, 429 and 5xx only.
pub const MAX_RETRIES: u32 = 3;
pub const DEFAULT_RETRY_BASE_MS: u64 = 500;
pub const DEFAULT_TIMEOUT_SECS: u64 = 300;

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 1],
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Debug, Serialize)]
struct Message<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    usage: Option<Usage>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Usage {
    prompt_tokens: Option<u64>,
    completion_tokens: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct HttpProvider {
    endpoint_url: String,
    model_name: String,
    api_key_env_var: Option<String>,
    retry_base: Duration,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn from_config(config: &ProviderConfig) -> Result<HttpProvider, ProviderError> {
        let endpoint_url = config
            .endpoint_url
            .clone()
            .ok_or_else(|| ProviderError::Config("missing endpoint_url".into()))?;
        let model_name = config
            .model_name
            .clone()
            .ok_or_else(|| ProviderError::Config("missing model_name".into()))?;
        let timeout = Duration::from_secs(config.timeout_secs.unwrap_or(DEFAULT_TIMEOUT_SECS));
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        Ok(HttpProvider {
            endpoint_url,
            model_name,
            api_key_env_var: config.api_key_env_var.clone(),
            retry_base: Duration::from_millis(
                config.retry_base_ms.unwrap_or(DEFAULT_RETRY_BASE_MS),
            ),
            agent,
        })
    }

    fn api_key(&self) -> Result<Option<String>, ProviderError> {
        match &self.api_key_env_var {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| ProviderError::MissingApiKey(var.clone())),
        }
    }

    fn send_once(
        &self,
        body: &ChatRequest<'_>,
        key: Option<&str>,
    ) -> Result<(u16, String), ProviderError> {
        let mut req = self.agent.post(&self.endpoint_url);
        if let Some(key) = key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok((status, text))
    }

    /// One chat request with bounded retries.
    pub fn chat(
        &self,
        prompt: &str,
        sampling: &SamplingConfig,
    ) -> Result<Completion, ProviderError> {
        let key = self.api_key()?;
        let (temperature, top_p) = sampling.effective();
        let body = ChatRequest {
            model: &self.model_name,
            messages: [Message {
                role: "user",
                content: prompt,
            }],
            temperature,
            top_p,
            max_tokens: sampling.max_output_tokens,
        };
        let mut attempt = 0;
        loop {
            let outcome = self.send_once(&body, key.as_deref());
            let retryable = match &outcome {
                Err(ProviderError::Transport(_)) => true,
                Ok((status, _)) => *status == 429 || (500..600).contains(status),
                Err(_) => false,
            };
            if retryable && attempt < MAX_RETRIES {
                thread::sleep(self.retry_base * 2u32.pow(attempt));
                attempt += 1;
                continue;
            }
            let (status, text) = outcome?;
            if !(200..300).contains(&status) {
                return Err(ProviderError::Status { status, body: text });
            }
            return parse_response(&text);
        }
    }
}

fn parse_response(text: &str) -> Result<Completion, ProviderError> {
    let resp: ChatResponse = serde_json::from_str(text)
        .map_err(|e| ProviderError::Protocol(format!("malformed response: {e}")))?;
    let content = resp
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| ProviderError::Protocol("response has no choices".into()))?
        .message
        .content
        .unwrap_or_default();
    let usage = resp
        .usage
        .ok_or_else(|| ProviderError::Protocol("response has no usage".into()))?;
    let input_tokens = usage
        .prompt_tokens
        .ok_or_else(|| ProviderError::Protocol("usage.prompt_tokens missing".into()))?;
    let output_tokens = usage
        .completion_tokens
        .ok_or_else(|| ProviderError::Protocol("usage.completion_tokens missing".into()))?;
    Ok(Completion {
        text: content,
        input_tokens,
        output_tokens,
    })
}

impl Provider for HttpProvider {
    fn complete(&self, request: &AttemptRequest<'_>) -> Result<Completion, ProviderError> {
        self.chat(request.prompt, request.sampling)
    }
}

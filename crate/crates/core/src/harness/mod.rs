//! Producing attempt records: prompts, providers, grading and the runner.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub mod grading;
pub mod http;
pub mod prompt;
pub mod provider;
pub mod runner;

pub use grading::{check_reference, extract_answer, grade};
pub use http::HttpProvider;
pub use prompt::{render_prompt, PROMPT_V1};
pub use provider::{
    build_provider, AttemptRequest, Provider, ProviderError, RandomGuesser, SimulatedProvider,
};
pub use runner::{run_cell, run_cells, CellJob, CellOutcome, CellReport};

/// Sampling settings shared by every attempt of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub n_attempts: u32,
    pub temperature: f64,
    pub top_p: Option<f64>,
    /// Reasoning models run at temperature 1.0 with no top_p.
    pub reasoning_mode: bool,
    pub max_output_tokens: Option<u32>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n_attempts: 8,
            temperature: 0.7,
            top_p: Some(1.0),
            reasoning_mode: false,
            max_output_tokens: None,
        }
    }
}

impl SamplingConfig {
    /// (temperature, top_p) actually sent.
    pub fn effective(&self) -> (f64, Option<f64>) {
        if self.reasoning_mode {
            (1.0, None)
        } else {
            (self.temperature, self.top_p)
        }
    }

    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_attempts == 0 {
            out.push("n_attempts must be positive".to_string());
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            out.push("temperature must be a non-negative number".to_string());
        }
        if let Some(p) = self.top_p {
            if !(p > 0.0 && p <= 1.0) {
                out.push("top_p must lie in (0, 1]".to_string());
            }
        }
        if self.max_output_tokens == Some(0) {
            out.push("max_output_tokens must be positive".to_string());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Simulated,
    HttpOpenaiCompatible,
    RandomGuesser,
}

/// Inclusive range of simulated output token counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenRange {
    pub min: u64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub id: String,
    pub kind: ProviderKind,
    /// Full chat-completions URL.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    /// Name of the environment variable holding the API key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env_var: Option<String>,
    /// Default per-attempt success probability of a simulated provider.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_prob: Option<f64>,
    /// Per-problem overrides of `success_prob`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub problem_success_prob: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_tokens: Option<TokenRange>,
    /// Options to guess among; falls back to the dataset's count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_count: Option<u32>,
    /// First retry delay; doubles on each further retry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retry_base_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<u64>,
}

impl ProviderConfig {
    pub fn new(id: &str, kind: ProviderKind) -> ProviderConfig {
        ProviderConfig {
            id: id.to_string(),
            kind,
            endpoint_url: None,
            model_name: None,
            api_key_env_var: None,
            success_prob: None,
            problem_success_prob: BTreeMap::new(),
            output_tokens: None,
            option_count: None,
            retry_base_ms: None,
            timeout_secs: None,
        }
    }

    pub fn simulated(id: &str, success_prob: f64) -> ProviderConfig {
        ProviderConfig {
            success_prob: Some(success_prob),
            ..ProviderConfig::new(id, ProviderKind::Simulated)
        }
    }

    pub fn random_guesser(id: &str, option_count: u32) -> ProviderConfig {
        ProviderConfig {
            option_count: Some(option_count),
            ..ProviderConfig::new(id, ProviderKind::RandomGuesser)
        }
    }

    pub fn http(id: &str, endpoint_url: &str, model_name: &str) -> ProviderConfig {
        ProviderConfig {
            endpoint_url: Some(endpoint_url.to_string()),
            model_name: Some(model_name.to_string()),
            ..ProviderConfig::new(id, ProviderKind::HttpOpenaiCompatible)
        }
    }

    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        match self.kind {
            ProviderKind::Simulated => {
                if self.success_prob.is_none() && self.problem_success_prob.is_empty() {
                    out.push(
                        "simulated provider needs success_prob or problem_success_prob".to_string(),
                    );
                }
                if self.success_prob.is_some_and(|p| !prob_ok(p)) {
                    out.push("success_prob must lie in [0, 1]".to_string());
                }
                for (problem, p) in &self.problem_success_prob {
                    if !prob_ok(*p) {
                        out.push(format!(
                            "success probability for {problem:?} must lie in [0, 1]"
                        ));
                    }
                }
                if let Some(r) = self.output_tokens {
                    if r.min > r.max {
                        out.push("output_tokens.min exceeds output_tokens.max".to_string());
                    }
                }
            }
            ProviderKind::HttpOpenaiCompatible => {
                if self.endpoint_url.as_deref().is_none_or(str::is_empty) {
                    out.push("http provider needs endpoint_url".to_string());
                }
                if self.model_name.as_deref().is_none_or(str::is_empty) {
                    out.push("http provider needs model_name".to_string());
                }
            }
            ProviderKind::RandomGuesser => {
                if let Some(k) = self.option_count {
                    if !(2..=26).contains(&k) {
                        out.push("option_count must lie in 2..=26".to_string());
                    }
                }
            }
        }
        out
    }
}

/// Text and token usage of one completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// Rough token count for simulated providers: a quarter of the characters.
pub fn approx_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

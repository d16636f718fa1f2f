//! The provider abstraction and the two offline providers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::grading::option_letter;
use super::http::HttpProvider;
use super::{approx_tokens, Completion, ProviderConfig, ProviderKind, SamplingConfig, TokenRange};
use crate::records::{DatasetRef, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("environment variable {0} with the API key is not set")]
    MissingApiKey(String),
    #[error("provider misconfigured: {0}")]
    Config(String),
}

/// Everything a provider may use to produce one attempt.
#[derive(Debug, Clone, Copy)]
pub struct AttemptRequest<'a> {
    pub strategy_id: &'a str,
    pub dataset: &'a DatasetRef,
    pub problem: &'a ProblemInstance,
    pub prompt: &'a str,
    pub sampling: &'a SamplingConfig,
    pub seed: u64,
    pub attempt_index: u32,
}

impl AttemptRequest<'_> {
    /// Per-attempt RNG keyed by (seed, strategy, dataset, problem, attempt).
    pub fn rng(&self) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        for part in [self.strategy_id, &self.dataset.id, &self.problem.problem_id] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        h.update(self.attempt_index.to_le_bytes());
        let digest = h.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }
}

pub trait Provider: Send + Sync {
    fn complete(&self, request: &AttemptRequest<'_>) -> Result<Completion, ProviderError>;

    /// Whether completions depend only on the request (no wall-clock data
    /// should then be recorded).
    fn is_deterministic(&self) -> bool {
        false
    }
}

/// Answers correctly with a configured probability.
#[derive(Debug, Clone)]
pub struct SimulatedProvider {
    config: ProviderConfig,
}

pub const DEFAULT_SIMULATED_OUTPUT: TokenRange = TokenRange { min: 100, max: 400 };

impl SimulatedProvider {
    pub fn new(config: ProviderConfig) -> Self {
        SimulatedProvider { config }
    }

    pub fn success_prob(&self, problem_id: &str) -> f64 {
        self.config
            .problem_success_prob
            .get(problem_id)
            .copied()
            .or(self.config.success_prob)
            .unwrap_or(0.0)
    }
}

impl Provider for SimulatedProvider {
    fn complete(&self, request: &AttemptRequest<'_>) -> Result<Completion, ProviderError> {
        let mut rng = request.rng();
        let correct = rng.random_bool(
            self.success_prob(&request.problem.problem_id)
                .clamp(0.0, 1.0),
        );
        let range = self
            .config
            .output_tokens
            .unwrap_or(DEFAULT_SIMULATED_OUTPUT);
        let mut output_tokens = rng.random_range(range.min..=range.max);
        if let Some(cap) = request.sampling.max_output_tokens {
            output_tokens = output_tokens.min(cap as u64);
        }
        let answer = if correct {
            request.problem.reference_answer.as_str()
        } else {
            "no answer"
        };
        Ok(Completion {
            text: format!("Working through it.\n<answer>{answer}</answer>"),
            input_tokens: approx_tokens(request.prompt),
            output_tokens,
        })
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Output tokens billed for one random guess.
pub const GUESS_OUTPUT_TOKENS: u64 = 3;

/// Picks one of the first k option letters uniformly at random.
#[derive(Debug, Clone)]
pub struct RandomGuesser {
    option_count: Option<u32>,
}

impl RandomGuesser {
    pub fn new(option_count: Option<u32>) -> Self {
        RandomGuesser { option_count }
    }
}

impl Provider for RandomGuesser {
    fn complete(&self, request: &AttemptRequest<'_>) -> Result<Completion, ProviderError> {
        let k = self
            .option_count
            .or(request.dataset.option_count)
            .ok_or_else(|| {
                ProviderError::Config(format!(
                    "no option count for dataset {}",
                    request.dataset.id
                ))
            })?;
        if !(1..=26).contains(&k) {
            return Err(ProviderError::Config(format!(
                "cannot guess among {k} options"
            )));
        }
        let letter = option_letter(request.rng().random_range(0..k));
        Ok(Completion {
            text: format!("<answer>({letter})</answer>"),
            input_tokens: approx_tokens(request.prompt),
            output_tokens: GUESS_OUTPUT_TOKENS,
        })
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

pub fn build_provider(config: &ProviderConfig) -> Result<Box<dyn Provider>, ProviderError> {
    let violations = config.invariant_violations();
    if !violations.is_empty() {
        return Err(ProviderError::Config(violations.join("; ")));
    }
    Ok(match config.kind {
        ProviderKind::Simulated => Box::new(SimulatedProvider::new(config.clone())),
        ProviderKind::RandomGuesser => Box::new(RandomGuesser::new(config.option_count)),
        ProviderKind::HttpOpenaiCompatible => Box::new(HttpProvider::from_config(config)?),
    })
}

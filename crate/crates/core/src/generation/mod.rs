//! Uniform interface to text-generation providers: request/completion
//! types, provider profiles, retry and rate-limit policy, and the
//! deterministic fixture-backed mock used throughout the test suite.

pub mod client;
pub mod http;
pub mod mock;

pub use client::{ProviderClient, RatePolicy, RetryPolicy};
pub use http::{ApiStyle, HttpProvider, HttpProviderConfig};
pub use mock::{prompt_digest, MockProvider};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sampling temperature. Wraps `f64` with bitwise equality/hash so it can
/// key maps and survive a JSON round trip unchanged; every value in the
/// system originates from parsing the same config or CLI literals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Temperature(pub f64);

impl Temperature {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Temperature {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Temperature {}

impl std::hash::Hash for Temperature {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Temperature {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Temperature {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Temperature {
    /// Canonical short form: `0.5`, `1`. Mock fixtures key per-temperature
    /// overrides on exactly this rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Temperature {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse::<f64>().map(Temperature)
    }
}

/// System prompt attached ahead of the user prompt on chat-style providers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SystemPromptMode {
    /// No system message.
    #[default]
    None,
    /// Generic assistant framing: complete the code the user describes.
    UnguidedV0,
    /// Verilog-specific framing: act as an autocomplete engine for a
    /// partially written module and always close the module.
    GuidedV1,
}

impl SystemPromptMode {
    pub fn text(self) -> Option<&'static str> {
        match self {
            SystemPromptMode::None => None,
            SystemPromptMode::UnguidedV0 => Some(
                "You are a programming assistant. Complete the code that the \
                 user describes, continuing exactly from where their input ends.",
            ),
            SystemPromptMode::GuidedV1 => Some(
                "You are a Verilog autocomplete engine. The user gives you a \
                 partially written Verilog module; respond only with the code \
                 that completes it, and always finish the module with \
                 endmodule.",
            ),
        }
    }
}

/// One sampling request: a prompt plus the parameters of the draw.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub prompt: String,
    pub temperature: Temperature,
    /// Completions wanted; the client splits across provider call caps.
    pub n: usize,
    pub max_tokens: u32,
    pub system_prompt_mode: SystemPromptMode,
    /// Passed through to providers that accept a seed; ignored otherwise.
    pub request_seed: Option<u64>,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>, temperature: Temperature, n: usize) -> Self {
        GenerationRequest {
            prompt: prompt.into(),
            temperature,
            n,
            max_tokens: 300,
            system_prompt_mode: SystemPromptMode::None,
            request_seed: None,
        }
    }
}

/// One generated completion with the wall-clock latency of the provider
/// call that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub index: usize,
    pub raw_text: String,
    pub latency_seconds: f64,
    pub provider_finish_reason: String,
}

/// Completion text as a provider hands it back, before the client assigns
/// global indices and latencies.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCompletion {
    pub text: String,
    pub finish_reason: String,
}

/// Why one provider call failed, and whether retrying can help.
#[derive(Debug, Clone)]
pub struct CallError {
    pub retryable: bool,
    pub message: String,
}

impl CallError {
    pub fn transport(message: impl Into<String>) -> Self {
        CallError { retryable: true, message: message.into() }
    }

    pub fn fatal(message: impl Into<String>) -> Self {
        CallError { retryable: false, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("provider {provider_id}: credential variable {variable} is not set")]
    MissingCredential { provider_id: String, variable: String },
    #[error("provider {provider_id}: all {attempts} attempt(s) failed: {log:?}")]
    Exhausted { provider_id: String, attempts: usize, log: Vec<String> },
    #[error("provider {provider_id}: {message}")]
    Provider { provider_id: String, message: String },
    #[error("fixture {path}: {message}")]
    Fixture { path: String, message: String },
    #[error("generation config: {0}")]
    Config(String),
}

/// A raw provider: one network (or fixture) call at a time, with a cap on
/// how many completions a single call may request.
pub trait Provider: Send + Sync {
    fn id(&self) -> &str;

    /// Largest `n` a single call supports.
    fn max_n_per_call(&self) -> usize;

    /// Performs one call asking for exactly `n` completions.
    fn call(&self, request: &GenerationRequest, n: usize)
        -> Result<Vec<RawCompletion>, CallError>;
}

/// What the sweep consumes: batched generation with retries, splitting,
/// and pacing already applied.
pub trait CompletionService: Send + Sync {
    fn provider_id(&self) -> &str;

    /// Returns exactly `request.n` completions, indexed `0..n`.
    fn generate(&self, request: &GenerationRequest)
        -> Result<Vec<Completion>, GenerationError>;
}

//! Provider wrapper adding the behavior every backend needs: bounded
//! retries with exponential backoff, transparent splitting of large `n`
//! across per-call caps, request pacing, and latency capture.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use super::{
    CallError, Completion, CompletionService, GenerationError, GenerationRequest, Provider,
};

/// Retry schedule for transport-class failures.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    /// Total attempts, the first included.
    pub attempts: usize,
    pub initial_backoff: Duration,
    pub backoff_multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
            backoff_multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    /// Instant retries, for tests that plant transient failures.
    pub fn immediate(attempts: usize) -> Self {
        RetryPolicy {
            attempts,
            initial_backoff: Duration::ZERO,
            backoff_multiplier: 1.0,
        }
    }

    fn backoff_before(&self, attempt_no: usize) -> Duration {
        let factor = self.backoff_multiplier.powi(attempt_no.saturating_sub(1) as i32);
        self.initial_backoff.mul_f64(factor)
    }
}

/// Token-bucket pacing: at most `burst` requests at once, refilled at
/// `per_second`. `None` disables pacing.
#[derive(Debug, Clone, Copy)]
pub struct RatePolicy {
    pub per_second: f64,
    pub burst: f64,
}

#[derive(Debug)]
struct Bucket {
    tokens: f64,
    last_refill: Instant,
}

#[derive(Debug)]
struct RateLimiter {
    policy: RatePolicy,
    bucket: Mutex<Bucket>,
}

impl RateLimiter {
    fn new(policy: RatePolicy) -> Self {
        RateLimiter {
            policy,
            bucket: Mutex::new(Bucket { tokens: policy.burst, last_refill: Instant::now() }),
        }
    }

    /// Blocks until a token is available, then takes it.
    fn acquire(&self) {
        loop {
            let wait = {
                let mut bucket = self.bucket.lock().expect("rate limiter poisoned");
                let now = Instant::now();
                let elapsed = now.duration_since(bucket.last_refill).as_secs_f64();
                bucket.tokens = (bucket.tokens + elapsed * self.policy.per_second)
                    .min(self.policy.burst);
                bucket.last_refill = now;
                if bucket.tokens >= 1.0 {
                    bucket.tokens -= 1.0;
                    return;
                }
                // Sleep exactly long enough for the deficit to refill.
                Duration::from_secs_f64((1.0 - bucket.tokens) / self.policy.per_second)
            };
            std::thread::sleep(wait);
        }
    }
}

/// A [`Provider`] promoted to a [`CompletionService`].
pub struct ProviderClient<P> {
    provider: P,
    retry: RetryPolicy,
    limiter: Option<RateLimiter>,
}

impl<P: Provider> ProviderClient<P> {
    pub fn new(provider: P) -> Self {
        ProviderClient { provider, retry: RetryPolicy::default(), limiter: None }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_rate_limit(mut self, policy: RatePolicy) -> Self {
        self.limiter = Some(RateLimiter::new(policy));
        self
    }

    /// One provider call with the retry schedule applied.
    fn call_with_retry(
        &self,
        request: &GenerationRequest,
        n: usize,
    ) -> Result<(Vec<super::RawCompletion>, f64), GenerationError> {
        let mut log = Vec::new();
        for attempt in 1..=self.retry.attempts.max(1) {
            if attempt > 1 {
                std::thread::sleep(self.retry.backoff_before(attempt - 1));
            }
            if let Some(limiter) = &self.limiter {
                limiter.acquire();
            }
            let started = Instant::now();
            match self.provider.call(request, n) {
                Ok(batch) => {
                    if batch.len() != n {
                        return Err(GenerationError::Provider {
                            provider_id: self.provider.id().to_string(),
                            message: format!(
                                "call returned {} completion(s), asked for {n}",
                                batch.len()
                            ),
                        });
                    }
                    return Ok((batch, started.elapsed().as_secs_f64()));
                }
                Err(CallError { retryable, message }) => {
                    log.push(format!("attempt {attempt}: {message}"));
                    if !retryable {
                        return Err(GenerationError::Provider {
                            provider_id: self.provider.id().to_string(),
                            message: log.join("; "),
                        });
                    }
                }
            }
        }
        Err(GenerationError::Exhausted {
            provider_id: self.provider.id().to_string(),
            attempts: self.retry.attempts.max(1),
            log,
        })
    }
}

impl<P: Provider> CompletionService for ProviderClient<P> {
    fn provider_id(&self) -> &str {
        self.provider.id()
    }

    fn generate(
        &self,
        request: &GenerationRequest,
    ) -> Result<Vec<Completion>, GenerationError> {
        if request.n == 0 {
            return Err(GenerationError::Config("request.n must be at least 1".into()));
        }
        let cap = self.provider.max_n_per_call().max(1);
        let mut completions = Vec::with_capacity(request.n);
        let mut remaining = request.n;
        while remaining > 0 {
            let take = remaining.min(cap);
            let (batch, latency) = self.call_with_retry(request, take)?;
            for raw in batch {
                completions.push(Completion {
                    index: completions.len(),
                    raw_text: raw.text,
                    latency_seconds: latency,
                    provider_finish_reason: raw.finish_reason,
                });
            }
            remaining -= take;
        }
        debug_assert_eq!(completions.len(), request.n);
        Ok(completions)
    }
}

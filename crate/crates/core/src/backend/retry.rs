use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BackendError;

/// Exponential backoff with jitter for transport and rate-limit failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            base_delay_ms: 500,
            max_delay_ms: 30_000,
        }
    }
}

impl RetryPolicy {
    pub fn no_delay(max_attempts: u32) -> Self {
        Self {
            max_attempts,
            base_delay_ms: 0,
            max_delay_ms: 0,
        }
    }

    /// Delay before retry number `attempt` (0-based), jittered into
    /// `[cap/2, cap]`.
    pub fn delay(&self, attempt: u32) -> Duration {
        let cap = self
            .base_delay_ms
            .saturating_mul(1u64 << attempt.min(20))
            .min(self.max_delay_ms);
        if cap == 0 {
            return Duration::ZERO;
        }
        let jittered = rand::rng().random_range(cap / 2..=cap);
        Duration::from_millis(jittered)
    }

    /// Runs `op` until it succeeds, fails with a non-retryable error, or the
    /// attempt budget is spent.
    pub fn run<T>(&self, mut op: impl FnMut() -> Result<T, RetryableFailure>) -> Result<T, BackendError> {
        let attempts = self.max_attempts.max(1);
        let mut attempt = 0;
        loop {
            match op() {
                Ok(v) => return Ok(v),
                Err(failure) => {
                    attempt += 1;
                    if !failure.error.is_retryable() || attempt >= attempts {
                        return Err(failure.error);
                    }
                    let wait = failure
                        .retry_after
                        .map(|ra| ra.min(Duration::from_millis(self.max_delay_ms)))
                        .unwrap_or_else(|| self.delay(attempt - 1));
                    log::warn!("retrying after {:?} ({})", wait, failure.error);
                    std::thread::sleep(wait);
                }
            }
        }
    }
}

/// An error plus an optional server-suggested wait.
#[derive(Debug)]
pub struct RetryableFailure {
    pub error: BackendError,
    pub retry_after: Option<Duration>,
}

impl From<BackendError> for RetryableFailure {
    fn from(error: BackendError) -> Self {
        Self {
            error,
            retry_after: None,
        }
    }
}

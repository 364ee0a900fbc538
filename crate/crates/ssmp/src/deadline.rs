//! Cooperative deadlines.
//!
//! Solvers receive a [`Deadline`] and poll it at least once per outer loop
//! iteration, so wall-clock overshoot is bounded by one checkpoint interval.

use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Clone, Copy, Debug)]
pub struct Deadline {
    expires_at: Option<Instant>,
}

impl Deadline {
    /// No limit; `expired` is always false.
    pub fn none() -> Self {
        Deadline { expires_at: None }
    }

    pub fn after(limit: Duration) -> Self {
        Deadline { expires_at: Some(Instant::now() + limit) }
    }

    pub fn after_secs(secs: f64) -> Self {
        Deadline::after(Duration::from_secs_f64(secs))
    }

    pub fn expired(&self) -> bool {
        match self.expires_at {
            Some(t) => Instant::now() >= t,
            None => false,
        }
    }

    pub fn check(&self) -> Result<(), SolveError> {
        if self.expired() {
            Err(SolveError::TimedOut)
        } else {
            Ok(())
        }
    }

    /// Seconds left, `None` when unlimited. Zero once expired.
    pub fn remaining_secs(&self) -> Option<f64> {
        self.expires_at.map(|t| t.saturating_duration_since(Instant::now()).as_secs_f64())
    }
}

/// Failures shared across solvers. `TimedOut` is the cooperative-deadline
/// signal; the rest are resource guards or backend trouble.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("deadline expired")]
    TimedOut,
    #[error("table of {cells} cells exceeds the budget of {budget}")]
    TableTooLarge { cells: u128, budget: u64 },
    #[error("split cache of {entries} entries exceeds the budget of {budget}")]
    CacheTooLarge { entries: u128, budget: u64 },
    #[error("split point {r} outside 0..={n}")]
    SplitOutOfRange { r: usize, n: usize },
    #[error("instance of {size} elements over the exhaustive limit of {limit}")]
    TooLargeForOracle { size: usize, limit: usize },
    #[error("milp backend failed: {0}")]
    Backend(String),
    #[error("warm start rejected: {0}")]
    BadWarmStart(String),
}

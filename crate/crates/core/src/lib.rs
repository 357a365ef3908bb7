//! Screening of many predictors for linear association with a
//! right-censored survival outcome.
//!
//! The [`stabilized`] estimator averages single-observation one-step
//! increments over growing data prefixes, each using the predictor selected
//! on that prefix, which keeps it asymptotically normal even when the number
//! of predictors far exceeds the sample size.

pub mod error;
pub mod estimators;
pub mod normal;
pub mod residual_life;
pub mod rng;
pub mod simulation;
pub mod stabilized;
pub mod survival;

pub use error::{Error, Result};

/// Runs `f` on a dedicated rayon pool with `threads` workers, or on the
/// global pool when `threads` is `None`.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> T
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    match threads {
        Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::scenario::{draw_latent, ErrorLaw, Model};
use crate::error::{Error, Result};

/// Monte-Carlo size of each calibration probe.
pub const CALIBRATION_DRAWS: usize = 100_000;
pub const CALIBRATION_SEED: u64 = 0x5EED_CA11;
pub const DEFAULT_TOLERANCE: f64 = 0.005;
const MAX_ITERATIONS: usize = 60;
const LOG_RATE_BRACKET: (f64, f64) = (-40.0, 40.0);

type CacheKey = (Model, ErrorLaw, u64, u64, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Fraction of censored observations, `P(C < T)`, at rate `lambda` for
/// survival times `t` and standard exponentials `e`:
/// `C < T` iff `E < lambda exp(T)`.
pub fn censoring_fraction(t: &[f64], e: &[f64], lambda: f64) -> f64 {
    let censored = t
        .iter()
        .zip(e)
        .filter(|&(&ti, &ei)| super::scenario::censoring_time(ei, lambda) < ti)
        .count();
    censored as f64 / t.len() as f64
}

/// Exponential censoring rate giving the target censoring fraction.
///
/// Bisection on `ln lambda` runs for a fixed number of iterations against
/// common random numbers (a fixed calibration sample), so the result is a
/// reproducible constant; it fails if the final fraction misses the target
/// by more than `tol` (default 0.005). Results are cached per
/// `(model, error law, rho, target, tol)`.
pub fn calibrate_censoring_rate(
    model: Model,
    error: ErrorLaw,
    rho: f64,
    target: f64,
    tol: Option<f64>,
) -> Result<f64> {
    let tol = tol.unwrap_or(DEFAULT_TOLERANCE);
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "censoring target must lie in (0, 1), got {target}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    // Holding the lock for the whole computation makes calibration single-flight.
    let mut guard = cache().lock().unwrap_or_else(|e| e.into_inner());
    let key = (model, error, rho.to_bits(), target.to_bits(), tol.to_bits());
    if let Some(&lambda) = guard.get(&key) {
        return Ok(lambda);
    }

    let columns = model.active_predictors().max(1);
    let sample = draw_latent(model, error, rho, CALIBRATION_DRAWS, columns, CALIBRATION_SEED);
    let (mut lo, mut hi) = LOG_RATE_BRACKET;
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if censoring_fraction(&sample.t, &sample.e, mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = (0.5 * (lo + hi)).exp();
    if (censoring_fraction(&sample.t, &sample.e, lambda) - target).abs() > tol {
        return Err(Error::CalibrationFailed { target });
    }
    guard.insert(key, lambda);
    Ok(lambda)
}

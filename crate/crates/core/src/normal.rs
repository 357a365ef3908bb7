//! Standard-normal helpers for Wald intervals and two-sided p-values.

use statrs::distribution::{ContinuousCDF, Normal};

/// The 97.5% standard-normal quantile used for 95% intervals.
pub const Z_95: f64 = 1.96;

pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `2 (1 - Phi(|z|))`, computed without cancellation.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// `z_{1 - alpha/2}`. Returns exactly [`Z_95`] for `alpha = 0.05`.
pub fn z_two_sided(alpha: f64) -> f64 {
    if alpha == 0.05 {
        return Z_95;
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(1.0 - alpha / 2.0)
}

//! Standard normal helpers.

use libm::erfc;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF, computed through `erfc` so the lower tail keeps
/// full relative precision.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Mass of a `N(mu, sigma^2)` variable inside `[lower, upper]`.
pub fn normal_interval_mass(mu: f64, sigma: f64, lower: f64, upper: f64) -> f64 {
    let a = (lower - mu) / sigma;
    let b = (upper - mu) / sigma;
    // Evaluate on the side of the mean where the tail is small to avoid cancellation.
    if a > 0.0 {
        norm_cdf(-a) - norm_cdf(-b)
    } else {
        norm_cdf(b) - norm_cdf(a)
    }
}

/// Sample mean and standard error (`sd / sqrt(n)`, with `n - 1` in the variance).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

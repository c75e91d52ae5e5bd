//! Myopic acquisition criteria for minimization.

use rand::Rng;

use crate::error::Result;
use crate::stats::{norm_cdf, norm_pdf};
use crate::surrogate::FittedSurrogate;

/// Expected improvement below `incumbent`.
pub fn ei(mean: f64, sd: f64, incumbent: f64) -> f64 {
    if !(sd > 0.0) {
        return (incumbent - mean).max(0.0);
    }
    let z = (incumbent - mean) / sd;
    (z * sd * norm_cdf(z) + sd * norm_pdf(z)).max(0.0)
}

/// Probability of improving on `incumbent`.
pub fn pi(mean: f64, sd: f64, incumbent: f64) -> f64 {
    if !(sd > 0.0) {
        return if mean < incumbent { 1.0 } else { 0.0 };
    }
    norm_cdf((incumbent - mean) / sd)
}

/// Optimistic lower bound below the incumbent, for a model fit on
/// incumbent-shifted data (the incumbent sits at zero). Clamped at zero.
pub fn ucb_min(mean_aug: f64, sd: f64, kappa: f64) -> f64 {
    (kappa * sd - mean_aug).max(0.0)
}

/// Thompson-sampling values at `candidates`: one joint posterior draw `g`
/// from a model fit on incumbent-shifted data, scored as `max(0, -g)`.
pub fn ts_values<R: Rng + ?Sized>(
    model: &FittedSurrogate,
    candidates: &[Vec<f64>],
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(model
        .sample_joint(candidates, rng)?
        .into_iter()
        .map(|g| (-g).max(0.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ei_degenerate_and_symmetric_cases() {
        assert_eq!(ei(0.5, 0.0, 1.0), 0.5);
        assert_eq!(ei(1.5, 0.0, 1.0), 0.0);
        assert!((ei(0.0, 1.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        let tail = ei(10.0, 1.0, 0.0);
        assert!((0.0..1e-15).contains(&tail));
    }

    #[test]
    fn pi_cases() {
        assert!((pi(0.0, 1.0, 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(pi(0.0, 0.0, 1.0), 1.0);
        assert_eq!(pi(2.0, 0.0, 1.0), 0.0);
        assert!((pi(0.0, 1.0, 1.0) - 0.841_344_746_068_543).abs() < 1e-12);
    }

    #[test]
    fn ucb_cases() {
        assert_eq!(ucb_min(0.0, 1.0, 2.0), 2.0);
        assert_eq!(ucb_min(5.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn ei_is_translation_invariant() {
        for &(m, s, f) in &[(0.3, 0.7, 0.1), (-2.0, 0.1, -1.9), (4.0, 2.0, 5.5)] {
            let c = 123.25;
            assert!((ei(m, s, f) - ei(m + c, s, f + c)).abs() < 1e-12);
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// Matérn with smoothness 5/2.
    #[default]
    Matern52,
    /// Squared exponential, the infinitely smooth limit.
    Gaussian,
}

/// Stationary anisotropic kernel `sigma^2 * rho(r)`, with `r` the
/// length-scale-weighted Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub length_scales: Vec<f64>,
    pub signal_scale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, length_scales: Vec<f64>, signal_scale: f64) -> Result<Self> {
        if length_scales.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::Config(format!(
                "length scales must be positive, got {length_scales:?}"
            )));
        }
        if !(signal_scale > 0.0) || !signal_scale.is_finite() {
            return Err(Error::Config(format!(
                "signal scale must be positive, got {signal_scale}"
            )));
        }
        Ok(Self {
            family,
            length_scales,
            signal_scale,
        })
    }

    pub fn isotropic(family: KernelFamily, dim: usize, length_scale: f64, signal_scale: f64) -> Result<Self> {
        Self::new(family, vec![length_scale; dim], signal_scale)
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    /// Prior variance `k(x, x)`.
    pub fn variance(&self) -> f64 {
        self.signal_scale * self.signal_scale
    }

    /// Correlation as a function of the scaled distance `r`.
    #[inline]
    pub fn correlation(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::Matern52 => {
                let s = SQRT5 * r;
                (1.0 + s + 5.0 * r * r / 3.0) * (-s).exp()
            }
            KernelFamily::Gaussian => (-0.5 * r * r).exp(),
        }
    }

    #[inline]
    pub fn scaled_distance(&self, x: &[f64], z: &[f64]) -> f64 {
        x.iter()
            .zip(z)
            .zip(&self.length_scales)
            .map(|((a, b), l)| ((a - b) / l).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[inline]
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        self.variance() * self.correlation(self.scaled_distance(x, z))
    }

    /// Row-major Gram matrix over `points`.
    pub fn gram(&self, points: &[Vec<f64>]) -> Vec<f64> {
        let n = points.len();
        let mut k = vec![0.0; n * n];
        let var = self.variance();
        for i in 0..n {
            k[i * n + i] = var;
            for j in 0..i {
                let v = self.eval(&points[i], &points[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    }

    /// `k_n(x)`: covariances between `x` and each of `points`.
    pub fn cross(&self, points: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        points.iter().map(|p| self.eval(p, x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_distance_gives_signal_variance() {
        for family in [KernelFamily::Matern52, KernelFamily::Gaussian] {
            let k = KernelSpec::new(family, vec![0.3, 2.0], 1.7).unwrap();
            assert_eq!(k.eval(&[0.1, 0.2], &[0.1, 0.2]), 1.7 * 1.7);
        }
    }

    #[test]
    fn matern_at_unit_distance() {
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 1, 1.0, 1.0).unwrap();
        // (1 + sqrt5 + 5/3) * exp(-sqrt5), evaluated independently.
        let expected = (1.0 + 5f64.sqrt() + 5.0 / 3.0) * (-(5f64.sqrt())).exp();
        assert!((k.eval(&[0.0], &[1.0]) - expected).abs() < 1e-15);
        assert!((expected - 0.523_994_8).abs() < 1e-6);
    }

    #[test]
    fn gaussian_tail_is_lighter_than_matern() {
        let m = KernelSpec::isotropic(KernelFamily::Matern52, 1, 1.0, 1.0).unwrap();
        let g = KernelSpec::isotropic(KernelFamily::Gaussian, 1, 1.0, 1.0).unwrap();
        for i in 0..200 {
            let r = 5.0 + i as f64 * 0.1;
            assert!(g.eval(&[0.0], &[r]) < m.eval(&[0.0], &[r]));
        }
    }

    #[test]
    fn anisotropic_scaling() {
        let k = KernelSpec::new(KernelFamily::Gaussian, vec![1.0, 2.0], 1.0).unwrap();
        assert!((k.scaled_distance(&[0.0, 0.0], &[3.0, 8.0]) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelSpec::new(KernelFamily::Matern52, vec![0.0], 1.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Matern52, vec![1.0], -1.0).is_err());
    }
}

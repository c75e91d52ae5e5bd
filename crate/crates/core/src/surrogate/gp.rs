use rand::Rng;
use rand_distr::StandardNormal;

use super::kernel::KernelSpec;
use crate::error::{Error, Result};
use crate::linalg::{factor_with_jitter, Cholesky};

/// Observed points and their objective values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservationSet {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl ObservationSet {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Config(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("observation values must be finite, got {v}")));
        }
        Ok(Self { points, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) {
        self.points.push(x);
        self.values.push(y);
    }

    /// Index of the smallest value.
    pub fn best(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

/// Exact zero-mean GP posterior conditioned on an [`ObservationSet`].
#[derive(Debug, Clone)]
pub struct GpPosterior {
    kernel: KernelSpec,
    points: Vec<Vec<f64>>,
    noise: f64,
    jitter: f64,
    chol: Cholesky,
    alpha: Vec<f64>,
    values: Vec<f64>,
}

impl GpPosterior {
    /// Factorizes `K + (noise + jitter) I`, escalating jitter on failure.
    pub fn fit(data: &ObservationSet, kernel: KernelSpec, noise: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Config("cannot fit a GP to zero observations".into()));
        }
        if !(noise >= 0.0) {
            return Err(Error::Config(format!("noise variance must be >= 0, got {noise}")));
        }
        if data.points.iter().any(|p| p.len() != kernel.dim()) {
            return Err(Error::Config("point dimension does not match kernel".into()));
        }
        let n = data.len();
        let gram = kernel.gram(&data.points);
        let (chol, jitter) = factor_with_jitter(&gram, n, noise).map_err(Error::Numerical)?;
        let alpha = chol.solve(&data.values);
        Ok(Self {
            kernel,
            points: data.points.clone(),
            noise,
            jitter,
            chol,
            alpha,
            values: data.values.clone(),
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Diagonal jitter that was added on top of the noise.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Posterior mean and variance at `x`. Variance is clamped at zero.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let mut k = self.kernel.cross(&self.points, x);
        let mean = k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        self.chol.solve_lower_in_place(&mut k);
        let reduction: f64 = k.iter().map(|v| v * v).sum();
        (mean, (self.kernel.variance() - reduction).max(0.0))
    }

    /// Joint posterior over `xs`: means and row-major covariance.
    pub fn predict_joint(&self, xs: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let m = xs.len();
        let mut means = Vec::with_capacity(m);
        let mut whitened = Vec::with_capacity(m);
        for x in xs {
            let mut k = self.kernel.cross(&self.points, x);
            means.push(k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum());
            self.chol.solve_lower_in_place(&mut k);
            whitened.push(k);
        }
        let mut cov = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let prior = self.kernel.eval(&xs[i], &xs[j]);
                let red: f64 = whitened[i].iter().zip(&whitened[j]).map(|(a, b)| a * b).sum();
                let v = prior - red;
                cov[i * m + j] = v;
                cov[j * m + i] = v;
            }
        }
        (means, cov)
    }

    /// One joint draw of the latent function at `xs`.
    pub fn sample_joint<R: Rng + ?Sized>(&self, xs: &[Vec<f64>], rng: &mut R) -> Result<Vec<f64>> {
        let (means, cov) = self.predict_joint(xs);
        let m = xs.len();
        let (chol, _) = factor_with_jitter(&cov, m, 0.0).map_err(Error::Numerical)?;
        let white: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let corr = chol.mul_lower(&white);
        Ok(means.iter().zip(corr).map(|(mu, e)| mu + e).collect())
    }

    /// `log p(y | X, theta)` including the jitter actually used.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.len() as f64;
        let fit: f64 = self.values.iter().zip(&self.alpha).map(|(y, a)| y * a).sum();
        -0.5 * fit - 0.5 * self.chol.log_det() - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

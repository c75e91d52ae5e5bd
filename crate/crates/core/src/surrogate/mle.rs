//! Type-II maximum likelihood for GP hyperparameters by multi-start compass
//! search over log-parameters.

use rand::Rng;

use super::gp::{GpPosterior, ObservationSet};
use super::kernel::{KernelFamily, KernelSpec};
use crate::error::{Error, Result};
use crate::search::compass_maximize;

/// Box constraints on the natural-log hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleBounds {
    pub log_length_scale: (f64, f64),
    pub log_signal_scale: (f64, f64),
    /// Bounds on the log of the noise *standard deviation*.
    pub log_noise_sd: (f64, f64),
}

impl Default for MleBounds {
    fn default() -> Self {
        Self {
            log_length_scale: (0.01f64.ln(), 10f64.ln()),
            log_signal_scale: (-4.0, 4.0),
            log_noise_sd: (-12.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleConfig {
    pub restarts: usize,
    pub evals_per_restart: usize,
    pub bounds: MleBounds,
    /// Keep the noise variance fixed instead of estimating it.
    pub fixed_noise: Option<f64>,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            evals_per_restart: 200,
            bounds: MleBounds::default(),
            fixed_noise: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleFit {
    pub kernel: KernelSpec,
    /// Noise variance.
    pub noise: f64,
    pub log_likelihood: f64,
    /// Log likelihood at each restart's starting point.
    pub start_log_likelihoods: Vec<f64>,
}

struct Layout {
    dim: usize,
    family: KernelFamily,
    fixed_noise: Option<f64>,
}

impl Layout {
    fn decode(&self, theta: &[f64]) -> Option<(KernelSpec, f64)> {
        let ls = theta[..self.dim].iter().map(|v| v.exp()).collect();
        let sigma = theta[self.dim].exp();
        let noise = match self.fixed_noise {
            Some(v) => v,
            None => (2.0 * theta[self.dim + 1]).exp(),
        };
        KernelSpec::new(self.family, ls, sigma).ok().map(|k| (k, noise))
    }

    fn log_likelihood(&self, data: &ObservationSet, theta: &[f64]) -> f64 {
        self.decode(theta)
            .and_then(|(k, noise)| GpPosterior::fit(data, k, noise).ok())
            .map(|gp| gp.log_marginal_likelihood())
            .filter(|v| v.is_finite())
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Maximizes the log marginal likelihood over length scales, signal scale
/// and (unless fixed) the noise level.
///
/// The first restart starts at the center of the box, the rest uniformly at
/// random inside it.
pub fn fit_mle<R: Rng + ?Sized>(
    data: &ObservationSet,
    family: KernelFamily,
    config: &MleConfig,
    rng: &mut R,
) -> Result<MleFit> {
    if data.len() < 2 {
        return Err(Error::Config("MLE needs at least two observations".into()));
    }
    let dim = data.points[0].len();
    let layout = Layout {
        dim,
        family,
        fixed_noise: config.fixed_noise,
    };
    let b = config.bounds;
    let mut lower = vec![b.log_length_scale.0; dim];
    let mut upper = vec![b.log_length_scale.1; dim];
    lower.push(b.log_signal_scale.0);
    upper.push(b.log_signal_scale.1);
    if config.fixed_noise.is_none() {
        lower.push(b.log_noise_sd.0);
        upper.push(b.log_noise_sd.1);
    }
    let step: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 0.25 * (u - l)).collect();

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut starts = Vec::with_capacity(config.restarts.max(1));
    for r in 0..config.restarts.max(1) {
        let x0: Vec<f64> = if r == 0 {
            lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect()
        } else {
            lower
                .iter()
                .zip(&upper)
                .map(|(l, u)| l + rng.random::<f64>() * (u - l))
                .collect()
        };
        let res = compass_maximize(
            |t| layout.log_likelihood(data, t),
            &x0,
            &lower,
            &upper,
            &step,
            config.evals_per_restart.max(1),
            1e-4,
        );
        starts.push(layout.log_likelihood(data, &x0));
        if res.value.is_finite() && best.as_ref().is_none_or(|(_, v)| res.value > *v) {
            best = Some((res.x, res.value));
        }
    }
    let (theta, ll) = best.ok_or_else(|| {
        Error::Numerical("every MLE restart failed to factorize the Gram matrix".into())
    })?;
    let (kernel, noise) = layout
        .decode(&theta)
        .ok_or_else(|| Error::Numerical("MLE produced invalid hyperparameters".into()))?;
    Ok(MleFit {
        kernel,
        noise,
        log_likelihood: ll,
        start_log_likelihoods: starts,
    })
}

//! Probabilistic response-surface models.
//!
//! [`GpPosterior`] and [`ForestModel`] are the raw models. [`fit_surrogate`]
//! wraps either one behind output standardization for use inside the
//! optimization loop; inputs are expected in the unit cube.

mod forest;
mod gp;
mod kernel;
mod mle;

pub use forest::{ForestConfig, ForestModel};
pub use gp::{GpPosterior, ObservationSet};
pub use kernel::{KernelFamily, KernelSpec};
pub use mle::{fit_mle, MleBounds, MleConfig, MleFit};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise variance used for noiseless benchmarks (standardized units).
pub const DEFAULT_NOISE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateKind {
    /// GP with fixed kernel hyperparameters.
    GpFixed,
    /// GP refit by maximum likelihood every iteration.
    #[default]
    GpMle,
    Forest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConfig {
    pub kind: SurrogateKind,
    pub family: KernelFamily,
    /// Length scale of the fixed GP, in unit-cube coordinates.
    pub fixed_length_scale: f64,
    pub fixed_signal_scale: f64,
    /// Fixed noise variance; `None` lets MLE estimate it (GP-MLE only).
    pub noise: Option<f64>,
    pub mle: MleConfig,
    pub forest: ForestConfig,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            kind: SurrogateKind::GpMle,
            family: KernelFamily::Matern52,
            fixed_length_scale: 0.2,
            fixed_signal_scale: 1.0,
            noise: Some(DEFAULT_NOISE),
            mle: MleConfig::default(),
            forest: ForestConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
enum Model {
    Gp(GpPosterior),
    Forest(ForestModel),
}

/// A fitted surrogate that predicts in the units of the data it was fit on.
#[derive(Debug, Clone)]
pub struct FittedSurrogate {
    model: Model,
    y_mean: f64,
    y_scale: f64,
}

/// Standardizes `values`, fits the configured model on `points` (unit cube).
pub fn fit_surrogate<R: Rng + ?Sized>(
    config: &SurrogateConfig,
    points: &[Vec<f64>],
    values: &[f64],
    rng: &mut R,
) -> Result<FittedSurrogate> {
    if points.is_empty() {
        return Err(Error::Config("surrogate needs at least one observation".into()));
    }
    let n = values.len() as f64;
    let y_mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n).sqrt();
    let y_scale = if sd > 1e-12 * (1.0 + y_mean.abs()) { sd } else { 1.0 };
    let std_values = values.iter().map(|v| (v - y_mean) / y_scale).collect();
    let data = ObservationSet::new(points.to_vec(), std_values)?;
    let dim = points[0].len();

    let model = match config.kind {
        SurrogateKind::GpFixed => {
            let k = KernelSpec::isotropic(
                config.family,
                dim,
                config.fixed_length_scale,
                config.fixed_signal_scale,
            )?;
            Model::Gp(GpPosterior::fit(&data, k, config.noise.unwrap_or(DEFAULT_NOISE))?)
        }
        SurrogateKind::GpMle if data.len() >= 2 => {
            let mle = MleConfig {
                fixed_noise: config.noise,
                ..config.mle.clone()
            };
            let fit = fit_mle(&data, config.family, &mle, rng)?;
            Model::Gp(GpPosterior::fit(&data, fit.kernel, fit.noise)?)
        }
        SurrogateKind::GpMle => {
            let k = KernelSpec::isotropic(
                config.family,
                dim,
                config.fixed_length_scale,
                config.fixed_signal_scale,
            )?;
            Model::Gp(GpPosterior::fit(&data, k, config.noise.unwrap_or(DEFAULT_NOISE))?)
        }
        SurrogateKind::Forest => Model::Forest(ForestModel::fit(&data, &config.forest, rng)?),
    };
    Ok(FittedSurrogate {
        model,
        y_mean,
        y_scale,
    })
}

impl FittedSurrogate {
    /// Predictive mean and variance in data units.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let (m, v) = match &self.model {
            Model::Gp(gp) => gp.predict(x),
            Model::Forest(f) => f.predict(x),
        };
        (self.y_mean + self.y_scale * m, self.y_scale * self.y_scale * v)
    }

    /// One posterior function draw at `xs`, in data units.
    ///
    /// GPs draw jointly over `xs`; forests draw by picking one tree at random.
    pub fn sample_joint<R: Rng + ?Sized>(&self, xs: &[Vec<f64>], rng: &mut R) -> Result<Vec<f64>> {
        let draw = match &self.model {
            Model::Gp(gp) => gp.sample_joint(xs, rng)?,
            Model::Forest(f) => {
                let t = rng.random_range(0..f.tree_count());
                xs.iter().map(|x| f.tree_predictions(x)[t]).collect()
            }
        };
        Ok(draw.into_iter().map(|g| self.y_mean + self.y_scale * g).collect())
    }

    pub fn is_forest(&self) -> bool {
        matches!(self.model, Model::Forest(_))
    }

    pub fn gp(&self) -> Option<&GpPosterior> {
        match &self.model {
            Model::Gp(gp) => Some(gp),
            Model::Forest(_) => None,
        }
    }

    pub fn forest(&self) -> Option<&ForestModel> {
        match &self.model {
            Model::Forest(f) => Some(f),
            Model::Gp(_) => None,
        }
    }
}

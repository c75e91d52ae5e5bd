//! Prior weighting with decay, prior binning for tree surrogates, and the
//! incumbent-shift data augmentation.

use crate::domain::Prior;
use crate::error::{Error, Result};
use crate::surrogate::ObservationSet;
use crate::theory::density_extrema;

/// `gamma_n = beta / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySchedule {
    pub beta: f64,
}

impl DecaySchedule {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { beta })
    }

    /// Exponent at BO iteration `n` (counted from 1).
    pub fn gamma(&self, n: usize) -> f64 {
        self.beta / n.max(1) as f64
    }
}

/// `alpha * pi(x)^(beta / n)`.
pub fn weight(alpha: f64, prior: &Prior, x: &[f64], schedule: DecaySchedule, n: usize) -> Result<f64> {
    Ok(alpha * prior.decayed_density(x, schedule.gamma(n))?)
}

/// Rounds the decayed prior onto a linear grid of `bins` levels relative to
/// its maximum, so a piecewise-constant acquisition surface stays piecewise
/// constant after weighting. As the prior flattens the occupied levels merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorBinning {
    pub bins: u32,
    pub log_max: f64,
    pub log_min: f64,
}

impl PriorBinning {
    pub const DEFAULT_BINS: u32 = 20;

    pub fn new(prior: &Prior, bins: u32) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("prior binning needs at least one bin".into()));
        }
        let ext = density_extrema(prior, None);
        Ok(Self {
            bins,
            log_max: ext.max.ln(),
            log_min: ext.min.ln(),
        })
    }

    fn level(&self, ratio: f64) -> u32 {
        let b = self.bins as f64;
        ((ratio * b - 1e-9).ceil() as i64).clamp(1, self.bins as i64) as u32
    }

    /// Log of the binned decayed prior for a point with log density `log_density`.
    pub fn binned_log(&self, log_density: f64, gamma: f64) -> f64 {
        let ratio = (gamma * (log_density - self.log_max)).exp().min(1.0);
        gamma * self.log_max + (self.level(ratio) as f64 / self.bins as f64).ln()
    }

    /// Upper bound on the number of distinct binned values at exponent `gamma`.
    pub fn level_count(&self, gamma: f64) -> u32 {
        let r_min = (gamma * (self.log_min - self.log_max)).exp().min(1.0);
        self.bins - self.level(r_min) + 1
    }
}

/// A user prior together with its decay schedule.
#[derive(Debug, Clone)]
pub struct PriorWeighting {
    pub prior: Prior,
    pub schedule: DecaySchedule,
    pub binning: Option<PriorBinning>,
}

impl PriorWeighting {
    pub fn new(prior: Prior, beta: f64) -> Result<Self> {
        Ok(Self {
            prior,
            schedule: DecaySchedule::new(beta)?,
            binning: None,
        })
    }

    pub fn with_binning(mut self, bins: u32) -> Result<Self> {
        self.binning = Some(PriorBinning::new(&self.prior, bins)?);
        Ok(self)
    }

    /// `log pi_n(x)` (binned if configured). Zero for flat priors, whose
    /// weight is constant and cannot change any argmax.
    pub fn log_weight(&self, x: &[f64], n: usize) -> Result<f64> {
        if self.prior.is_flat() {
            self.prior.space().check(x)?;
            return Ok(0.0);
        }
        let gamma = self.schedule.gamma(n);
        let lp = self.prior.log_density(x)?;
        Ok(match &self.binning {
            Some(b) => b.binned_log(lp, gamma),
            None => gamma * lp,
        })
    }
}

/// Observations shifted so the incumbent value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedData {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// The incumbent value that was subtracted.
    pub incumbent: f64,
}

impl AugmentedData {
    pub fn from_observations(data: &ObservationSet) -> Result<Self> {
        let incumbent = data
            .values
            .iter()
            .copied()
            .min_by(f64::total_cmp)
            .ok_or_else(|| Error::Config("cannot augment an empty data set".into()))?;
        Ok(Self {
            points: data.points.clone(),
            values: data.values.iter().map(|y| y - incumbent).collect(),
            incumbent,
        })
    }
}

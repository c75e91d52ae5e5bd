//! Acquisition functions, prior weighting with decay, and acquisition
//! maximization.

mod functions;
mod maximize;
mod weighting;

pub use functions::{ei, pi, ts_values, ucb_min};
pub use maximize::{maximize, pick_maximizer, AcquisitionContext, Candidate, CandidateBudget, Proposal};
pub use weighting::{weight, AugmentedData, DecaySchedule, PriorBinning, PriorWeighting};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AcquisitionKind {
    #[default]
    Ei,
    Pi,
    Ucb,
    Ts,
}

impl AcquisitionKind {
    /// UCB and TS are evaluated on incumbent-shifted data.
    pub fn uses_augmentation(self) -> bool {
        matches!(self, AcquisitionKind::Ucb | AcquisitionKind::Ts)
    }
}

#[derive(Debug, Clone)]
pub struct AcquisitionSpec {
    pub kind: AcquisitionKind,
    pub ucb_kappa: f64,
    pub ts_candidate_count: usize,
    pub prior_weighting: Option<PriorWeighting>,
}

impl Default for AcquisitionSpec {
    fn default() -> Self {
        Self {
            kind: AcquisitionKind::Ei,
            ucb_kappa: 2.0,
            ts_candidate_count: 512,
            prior_weighting: None,
        }
    }
}

impl AcquisitionSpec {
    pub fn new(kind: AcquisitionKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn with_prior(mut self, weighting: PriorWeighting) -> Self {
        self.prior_weighting = Some(weighting);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ucb_kappa > 0.0) {
            return Err(Error::Config(format!("ucb_kappa must be positive, got {}", self.ucb_kappa)));
        }
        if self.ts_candidate_count == 0 {
            return Err(Error::Config("ts_candidate_count must be at least 1".into()));
        }
        Ok(())
    }
}

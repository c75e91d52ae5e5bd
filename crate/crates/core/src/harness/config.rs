//! Experiment configuration files.
//!
//! One experiment per file, in TOML: an `[experiment]` section plus optional
//! `[optimizer]`, `[candidates]` and `[prior]` sections. Any key can be
//! overridden from the command line with `section.key=value`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::{AcquisitionKind, AcquisitionSpec, CandidateBudget, PriorWeighting};
use crate::benchmarks::Benchmark;
use crate::domain::{Prior, PriorComponent, PriorQuality, SearchSpace};
use crate::error::{Error, Result};
use crate::optimizer::{InitMode, OptimizerConfig};
use crate::surrogate::{ForestConfig, KernelFamily, MleConfig, SurrogateConfig, SurrogateKind, DEFAULT_NOISE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    PriorSampling,
    VanillaBo,
    Pibo,
}

impl Strategy {
    fn needs_prior(self) -> bool {
        matches!(self, Strategy::PriorSampling | Strategy::Pibo)
    }
}

fn default_repetitions() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub benchmark: String,
    pub strategy: Strategy,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    /// Defaults to `d + 1`.
    pub initial_design: Option<usize>,
    pub iterations: usize,
    /// Defaults to `iterations / 10`.
    pub beta: Option<f64>,
    pub surrogate: SurrogateKind,
    pub kernel: KernelFamily,
    pub noise: f64,
    /// Estimate the noise by MLE instead of fixing it to `noise`.
    pub noise_mle: bool,
    pub fixed_length_scale: f64,
    pub mle_restarts: usize,
    pub mle_evals: usize,
    pub acquisition: AcquisitionKind,
    pub ucb_kappa: f64,
    pub ts_candidates: usize,
    /// Defaults depend on the strategy.
    pub init_mode: Option<InitMode>,
    pub forest_trees: usize,
    pub prior_bins: u32,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            initial_design: None,
            iterations: 100,
            beta: None,
            surrogate: SurrogateKind::GpMle,
            kernel: KernelFamily::Matern52,
            noise: DEFAULT_NOISE,
            noise_mle: false,
            fixed_length_scale: 0.2,
            mle_restarts: 8,
            mle_evals: 200,
            acquisition: AcquisitionKind::Ei,
            ucb_kappa: 2.0,
            ts_candidates: 512,
            init_mode: None,
            forest_trees: 10,
            prior_bins: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateSection {
    pub uniform: usize,
    pub prior: usize,
    pub local: usize,
    pub local_sd: f64,
    pub refine_top: usize,
    pub refine_steps: usize,
}

impl Default for CandidateSection {
    fn default() -> Self {
        let b = CandidateBudget::default();
        Self {
            uniform: b.uniform,
            prior: b.prior,
            local: b.local,
            local_sd: b.local_sd,
            refine_top: b.refine_top,
            refine_steps: b.refine_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Gaussian,
    Uniform,
}

/// One dimension of an explicit prior. `mu` and `sigma` are in working
/// (log10 for log-scaled dimensions) units; `sigma_pct` is a fraction of the
/// dimension's range and takes effect when `sigma` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorDimSpec {
    pub kind: PriorKind,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSection {
    pub quality: Option<PriorQuality>,
    pub dims: Vec<PriorDimSpec>,
}

impl PriorSection {
    /// Builds the explicit prior described by `dims`.
    pub fn explicit_prior(&self, space: &SearchSpace) -> Result<Prior> {
        if self.dims.len() != space.dim() {
            return Err(Error::Config(format!(
                "prior lists {} dimensions, benchmark has {}",
                self.dims.len(),
                space.dim()
            )));
        }
        let comps = self
            .dims
            .iter()
            .enumerate()
            .map(|(i, d)| match d.kind {
                PriorKind::Uniform => Ok(PriorComponent::Uniform),
                PriorKind::Gaussian => {
                    let mu = d
                        .mu
                        .ok_or_else(|| Error::Config(format!("prior dimension {i} needs mu")))?;
                    let sigma = match (d.sigma, d.sigma_pct) {
                        (Some(s), _) => s,
                        (None, Some(p)) => p * space.range(i),
                        (None, None) => {
                            return Err(Error::Config(format!(
                                "prior dimension {i} needs sigma or sigma_pct"
                            )))
                        }
                    };
                    Ok(PriorComponent::TruncatedGaussian { mu, sigma })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Prior::new(space.clone(), comps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub candidates: CandidateSection,
    #[serde(default)]
    pub prior: Option<PriorSection>,
}

fn parse_override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `section.key=value` overrides to a parsed TOML table.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<()> {
    for ov in overrides {
        let (path, raw) = ov
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{ov}' is not of the form key=value")))?;
        let keys: Vec<&str> = path.trim().split('.').collect();
        if keys.iter().any(|k| k.is_empty()) {
            return Err(Error::Config(format!("override '{ov}' has an empty key")));
        }
        let mut cur = &mut *table;
        for k in &keys[..keys.len() - 1] {
            let entry = cur
                .entry(k.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cur = entry
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("override '{ov}': '{k}' is not a section")))?;
        }
        cur.insert(keys[keys.len() - 1].to_string(), parse_override_value(raw.trim()));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        apply_overrides(&mut table, overrides)?;
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn benchmark(&self) -> Result<Benchmark> {
        Benchmark::by_name(&self.experiment.benchmark)
    }

    pub fn initial_design(&self, bench: &Benchmark) -> usize {
        self.optimizer.initial_design.unwrap_or(bench.space().dim() + 1)
    }

    pub fn beta(&self) -> f64 {
        self.optimizer
            .beta
            .unwrap_or(self.optimizer.iterations as f64 / 10.0)
    }

    pub fn init_mode(&self) -> InitMode {
        if let Some(m) = self.optimizer.init_mode {
            return m;
        }
        match self.experiment.strategy {
            Strategy::Pibo => InitMode::PriorWithMode,
            Strategy::VanillaBo if self.prior.is_some() => InitMode::UniformWithMode,
            _ => InitMode::Uniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bench = self.benchmark()?;
        let e = &self.experiment;
        if e.repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        if self.initial_design(&bench) == 0 {
            return Err(Error::Config("initial_design must be >= 1".into()));
        }
        if e.strategy == Strategy::Pibo && !(self.beta() > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta())));
        }
        let needs_prior = e.strategy.needs_prior()
            || (e.strategy == Strategy::VanillaBo && self.init_mode() != InitMode::Uniform);
        match &self.prior {
            None if needs_prior => {
                return Err(Error::Config(format!(
                    "strategy {:?} with init mode {:?} needs a [prior] section",
                    e.strategy,
                    self.init_mode()
                )))
            }
            Some(p) if p.quality.is_none() && p.dims.is_empty() => {
                return Err(Error::Config("[prior] needs either quality or dims".into()))
            }
            Some(p) if p.quality.is_some() && !p.dims.is_empty() => {
                return Err(Error::Config("[prior] takes quality or dims, not both".into()))
            }
            Some(p) if !p.dims.is_empty() => {
                p.explicit_prior(bench.space())?;
            }
            _ => {}
        }
        let o = &self.optimizer;
        if !(o.ucb_kappa > 0.0) || o.ts_candidates == 0 || o.forest_trees == 0 || o.prior_bins == 0 {
            return Err(Error::Config(
                "ucb_kappa, ts_candidates, forest_trees and prior_bins must be positive".into(),
            ));
        }
        if !(o.noise >= 0.0) {
            return Err(Error::Config("noise must be >= 0".into()));
        }
        Ok(())
    }

    /// Optimizer settings for one repetition.
    pub fn optimizer_config(&self, bench: &Benchmark, prior: Option<&Prior>, seed: u64) -> Result<OptimizerConfig> {
        let o = &self.optimizer;
        let c = &self.candidates;
        let mut cfg = OptimizerConfig::new(self.initial_design(bench), o.iterations);
        cfg.seed = seed;
        cfg.record_timing = self.experiment.record_timing;
        cfg.init_mode = self.init_mode();
        cfg.surrogate = SurrogateConfig {
            kind: o.surrogate,
            family: o.kernel,
            fixed_length_scale: o.fixed_length_scale,
            fixed_signal_scale: 1.0,
            noise: if o.noise_mle { None } else { Some(o.noise) },
            mle: MleConfig {
                restarts: o.mle_restarts,
                evals_per_restart: o.mle_evals,
                ..MleConfig::default()
            },
            forest: ForestConfig {
                trees: o.forest_trees,
                ..ForestConfig::default()
            },
        };
        cfg.budget = CandidateBudget {
            uniform: c.uniform,
            prior: c.prior,
            local: c.local,
            local_sd: c.local_sd,
            refine_top: c.refine_top,
            refine_steps: c.refine_steps,
        };
        let mut acq = AcquisitionSpec::new(o.acquisition);
        acq.ucb_kappa = o.ucb_kappa;
        acq.ts_candidate_count = o.ts_candidates;
        if self.experiment.strategy == Strategy::Pibo {
            let prior = prior.ok_or_else(|| Error::Config("pibo needs a prior".into()))?;
            let mut w = PriorWeighting::new(prior.clone(), self.beta())?;
            if o.surrogate == SurrogateKind::Forest {
                w = w.with_binning(o.prior_bins)?;
            }
            acq = acq.with_prior(w);
        }
        cfg.acquisition = acq;
        Ok(cfg)
    }
}

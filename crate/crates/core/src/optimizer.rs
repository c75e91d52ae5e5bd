//! The prior-weighted BO loop: initial design, then repeated
//! fit / maximize / evaluate steps with the decay exponent `beta / n`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{maximize, AcquisitionContext, AcquisitionSpec, CandidateBudget, Proposal};
use crate::benchmarks::Benchmark;
use crate::domain::{Prior, SearchSpace};
use crate::error::{Error, Result};
use crate::surrogate::{fit_surrogate, ObservationSet, SurrogateConfig};

/// Something to minimize. Points are passed in natural units.
pub trait Objective: Sync {
    fn space(&self) -> &SearchSpace;
    fn evaluate(&self, x: &[f64]) -> f64;
    fn known_minimum(&self) -> Option<f64> {
        None
    }
}

impl Objective for Benchmark {
    fn space(&self) -> &SearchSpace {
        Benchmark::space(self)
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        self.value_unchecked(x)
    }

    fn known_minimum(&self) -> Option<f64> {
        Some(Benchmark::known_minimum(self))
    }
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F> {
    pub space: SearchSpace,
    pub f: F,
    pub known_minimum: Option<f64>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn known_minimum(&self) -> Option<f64> {
        self.known_minimum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Prior mode first, then prior samples.
    #[default]
    PriorWithMode,
    PriorOnly,
    Uniform,
    /// Prior mode first, then uniform samples.
    UniformWithMode,
}

impl InitMode {
    fn needs_prior(self) -> bool {
        !matches!(self, InitMode::Uniform)
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Initial design size `M`.
    pub initial_design: usize,
    /// BO iterations `N`.
    pub iterations: usize,
    pub surrogate: SurrogateConfig,
    /// Acquisition criterion; carries the prior weighting when enabled.
    pub acquisition: AcquisitionSpec,
    pub budget: CandidateBudget,
    pub init_mode: InitMode,
    pub seed: u64,
    /// Record wall-clock time per evaluation (otherwise zero, keeping traces byte-stable).
    pub record_timing: bool,
}

impl OptimizerConfig {
    pub fn new(initial_design: usize, iterations: usize) -> Self {
        Self {
            initial_design,
            iterations,
            surrogate: SurrogateConfig::default(),
            acquisition: AcquisitionSpec::default(),
            budget: CandidateBudget::default(),
            init_mode: InitMode::Uniform,
            seed: 0,
            record_timing: false,
        }
    }

    /// Default confidence `beta = N / 10`.
    pub fn default_beta(&self) -> f64 {
        self.iterations as f64 / 10.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_design == 0 {
            return Err(Error::Config("initial design size must be >= 1".into()));
        }
        self.acquisition.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Bo,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Bo => "bo",
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub phase: Phase,
    /// Evaluation index, counted from 1 across both phases.
    pub iter: usize,
    /// Point in natural units.
    pub point: Vec<f64>,
    pub value: f64,
    /// Best finite value so far (`NaN` until one exists).
    pub incumbent: f64,
    pub regret: Option<f64>,
    pub elapsed_ms: f64,
    /// The surrogate failed and this point was drawn uniformly instead.
    pub fallback: bool,
}

/// Full record of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub seed: u64,
    pub initial_design: usize,
    pub records: Vec<TraceRecord>,
}

impl RegretTrace {
    pub fn final_incumbent(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.incumbent)
    }

    pub fn final_regret(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.regret)
    }

    /// Record after `k` BO iterations (`k = 0` is the end of the initial design).
    pub fn after_bo_iterations(&self, k: usize) -> Option<&TraceRecord> {
        self.records.get((self.initial_design + k).checked_sub(1)?)
    }

    /// Best point seen (natural units).
    pub fn best_point(&self) -> Option<&[f64]> {
        self.records
            .iter()
            .filter(|r| r.value.is_finite())
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .map(|r| r.point.as_slice())
    }
}

/// Mutable state of a run.
pub struct RunState {
    /// Finite observations, points in working coordinates.
    pub data: ObservationSet,
    /// BO iterations completed.
    pub iteration: usize,
    pub incumbent: Option<(Vec<f64>, f64)>,
    pub rng: ChaCha8Rng,
    pub records: Vec<TraceRecord>,
    started: Instant,
}

impl RunState {
    fn new(seed: u64) -> Self {
        Self {
            data: ObservationSet::default(),
            iteration: 0,
            incumbent: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            records: Vec::new(),
            started: Instant::now(),
        }
    }
}

/// Drives one optimization run.
pub struct Optimizer<'a, O: Objective + ?Sized> {
    config: &'a OptimizerConfig,
    prior: Option<&'a Prior>,
    objective: &'a O,
}

impl<'a, O: Objective + ?Sized> Optimizer<'a, O> {
    pub fn new(config: &'a OptimizerConfig, prior: Option<&'a Prior>, objective: &'a O) -> Result<Self> {
        config.validate()?;
        if config.init_mode.needs_prior() && prior.is_none() {
            return Err(Error::Config(format!(
                "init mode {:?} needs a prior",
                config.init_mode
            )));
        }
        if let Some(p) = prior {
            if p.space() != objective.space() {
                return Err(Error::Config("prior and objective use different search spaces".into()));
            }
        }
        Ok(Self {
            config,
            prior,
            objective,
        })
    }

    fn space(&self) -> &SearchSpace {
        self.objective.space()
    }

    /// Evaluates `x` (working coordinates), records it, updates the incumbent.
    fn observe(&self, state: &mut RunState, x: Vec<f64>, phase: Phase, fallback: bool) {
        let natural = self.space().to_natural(&x);
        let y = self.objective.evaluate(&natural);
        if y.is_finite() {
            if state.incumbent.as_ref().is_none_or(|(_, best)| y < *best) {
                state.incumbent = Some((x.clone(), y));
            }
            state.data.push(x, y);
        }
        let incumbent = state.incumbent.as_ref().map_or(f64::NAN, |(_, v)| *v);
        let regret = match (self.objective.known_minimum(), incumbent.is_finite()) {
            (Some(m), true) => Some(incumbent - m),
            _ => None,
        };
        let elapsed_ms = if self.config.record_timing {
            state.started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        state.records.push(TraceRecord {
            phase,
            iter: state.records.len() + 1,
            point: natural,
            value: y,
            incumbent,
            regret,
            elapsed_ms,
            fallback,
        });
    }

    /// Builds and evaluates the initial design.
    pub fn initial_design(&self) -> Result<RunState> {
        let mut state = RunState::new(self.config.seed);
        let m = self.config.initial_design;
        let mut points = Vec::with_capacity(m);
        let with_mode = matches!(self.config.init_mode, InitMode::PriorWithMode | InitMode::UniformWithMode);
        if with_mode {
            points.push(self.prior.expect("checked in new").mode());
        }
        while points.len() < m {
            let x = match self.config.init_mode {
                InitMode::PriorWithMode | InitMode::PriorOnly => {
                    self.prior.expect("checked in new").sample(&mut state.rng)?
                }
                InitMode::Uniform | InitMode::UniformWithMode => self.space().sample_uniform(&mut state.rng),
            };
            points.push(x);
        }
        for x in points {
            self.observe(&mut state, x, Phase::Init, false);
        }
        if state.incumbent.is_none() {
            let r = &state.records[0];
            return Err(Error::NonFinite {
                point: r.point.clone(),
                value: r.value,
            });
        }
        Ok(state)
    }

    /// Proposes the next point (working coordinates) without evaluating it.
    pub fn propose(&self, state: &mut RunState) -> Result<Proposal> {
        let n = state.iteration + 1;
        let space = self.space();
        let acq = &self.config.acquisition;
        let units: Vec<Vec<f64>> = state.data.points.iter().map(|p| space.to_unit(p)).collect();
        let (values, incumbent_value) = if acq.kind.uses_augmentation() {
            let best = state.incumbent.as_ref().map_or(0.0, |(_, v)| *v);
            (state.data.values.iter().map(|y| y - best).collect::<Vec<_>>(), 0.0)
        } else {
            let best = state.incumbent.as_ref().map_or(f64::NAN, |(_, v)| *v);
            (state.data.values.clone(), best)
        };
        let model = fit_surrogate(&self.config.surrogate, &units, &values, &mut state.rng)?;
        let inc_unit = state.incumbent.as_ref().map(|(x, _)| space.to_unit(x));
        let ctx = AcquisitionContext {
            model: &model,
            space,
            incumbent_value,
            incumbent_point: inc_unit.as_deref(),
            iteration: n,
        };
        maximize(acq, &ctx, &self.config.budget, &mut state.rng)
    }

    /// One BO iteration. Surrogate failures fall back to a uniform proposal.
    pub fn step(&self, state: &mut RunState) {
        let (x, fallback) = match self.propose(state) {
            Ok(p) => (p.best.point, false),
            Err(_) => (self.space().sample_uniform(&mut state.rng), true),
        };
        state.iteration += 1;
        self.observe(state, x, Phase::Bo, fallback);
    }

    pub fn run(&self) -> Result<RegretTrace> {
        let mut state = self.initial_design()?;
        for _ in 0..self.config.iterations {
            self.step(&mut state);
        }
        Ok(RegretTrace {
            seed: self.config.seed,
            initial_design: self.config.initial_design,
            records: state.records,
        })
    }
}

/// Runs the full loop for `objective`.
pub fn run<O: Objective + ?Sized>(config: &OptimizerConfig, prior: Option<&Prior>, objective: &O) -> Result<RegretTrace> {
    Optimizer::new(config, prior, objective)?.run()
}

/// Non-adaptive baselines: every point drawn uniformly or from the prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Uniform,
    Prior,
}

/// Evaluates `initial_design + iterations` points drawn by `sampler`.
pub fn run_sampling<O: Objective + ?Sized>(
    sampler: Sampler,
    prior: Option<&Prior>,
    objective: &O,
    initial_design: usize,
    iterations: usize,
    seed: u64,
    record_timing: bool,
) -> Result<RegretTrace> {
    let mut config = OptimizerConfig::new(initial_design.max(1), iterations);
    config.seed = seed;
    config.record_timing = record_timing;
    config.init_mode = match sampler {
        Sampler::Uniform => InitMode::Uniform,
        Sampler::Prior => InitMode::PriorOnly,
    };
    let opt = Optimizer::new(&config, prior, objective)?;
    let mut state = RunState::new(seed);
    for k in 0..initial_design + iterations {
        let x = match sampler {
            Sampler::Uniform => objective.space().sample_uniform(&mut state.rng),
            Sampler::Prior => prior.expect("checked in new").sample(&mut state.rng)?,
        };
        let phase = if k < initial_design { Phase::Init } else { Phase::Bo };
        opt.observe(&mut state, x, phase, false);
    }
    Ok(RegretTrace {
        seed,
        initial_design,
        records: state.records,
    })
}

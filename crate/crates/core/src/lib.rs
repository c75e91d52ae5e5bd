//! Bayesian optimization with user priors over the location of the optimum.
//!
//! The acquisition function is multiplied by the user's prior raised to a
//! decaying power, `alpha(x) * pi(x)^(beta / n)`, so the prior steers early
//! iterations and fades as data accumulates.

pub mod acquisition;
pub mod benchmarks;
pub mod domain;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod optimizer;
pub mod search;
pub mod stats;
pub mod surrogate;
pub mod theory;

pub use acquisition::{AcquisitionKind, AcquisitionSpec, DecaySchedule, PriorWeighting};
pub use benchmarks::{Benchmark, BenchmarkId};
pub use domain::{Dimension, Prior, PriorComponent, PriorQuality, Scale, SearchSpace};
pub use error::{Error, Result};
pub use optimizer::{InitMode, Objective, OptimizerConfig, Phase, RegretTrace, TraceRecord};
pub use surrogate::{KernelFamily, KernelSpec, SurrogateConfig, SurrogateKind};

//! Analytic objectives with known optima.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::SearchSpace;
use crate::error::{Error, Result};
use crate::search::compass_maximize;

/// Floor added to regret before taking `log10`.
pub const REGRET_LOG_FLOOR: f64 = 1e-12;

/// Fixed x2 coordinate of the 1-D Branin slice.
pub const LOG_BRANIN_X2: f64 = 2.275;

const BRANIN_BOUNDS: [(f64, f64); 2] = [(-5.0, 10.0), (0.0, 15.0)];

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];
pub const HARTMANN6_MINIMIZER: [f64; 6] = [0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573];
pub const HARTMANN6_MINIMUM: f64 = -3.322_368_011_415_51;

fn branin_raw(x1: f64, x2: f64) -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

fn log_branin_raw(x1: f64) -> f64 {
    (branin_raw(x1, LOG_BRANIN_X2) + REGRET_LOG_FLOOR).log10()
}

fn hartmann6_raw(x: &[f64]) -> f64 {
    -(0..4)
        .map(|i| {
            let inner: f64 = (0..6)
                .map(|j| HARTMANN_A[i][j] * (x[j] - HARTMANN_P[i][j]).powi(2))
                .sum();
            HARTMANN_ALPHA[i] * (-inner).exp()
        })
        .sum::<f64>()
}

fn in_bounds(x: &[f64], bounds: &[(f64, f64)], name: &str) -> Result<()> {
    if x.len() != bounds.len() || x.iter().zip(bounds).any(|(v, (l, u))| !(*v >= *l && *v <= *u)) {
        return Err(Error::Domain(format!("{name}: point {x:?} outside {bounds:?}")));
    }
    Ok(())
}

/// Branin on `[-5, 10] x [0, 15]`.
pub fn branin(x1: f64, x2: f64) -> Result<f64> {
    in_bounds(&[x1, x2], &BRANIN_BOUNDS, "branin")?;
    Ok(branin_raw(x1, x2))
}

/// `log10` of Branin along `x2 = 2.275`, for `x1` in `[-5, 10]`.
pub fn log_branin_1d(x1: f64) -> Result<f64> {
    in_bounds(&[x1], &BRANIN_BOUNDS[..1], "log_branin_1d")?;
    Ok(log_branin_raw(x1))
}

/// Hartmann-6 on the unit hypercube.
pub fn hartmann6(x: &[f64]) -> Result<f64> {
    in_bounds(x, &[(0.0, 1.0); 6], "hartmann6")?;
    Ok(hartmann6_raw(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkId {
    Branin,
    LogBranin1d,
    Hartmann6,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 3] = [BenchmarkId::Branin, BenchmarkId::LogBranin1d, BenchmarkId::Hartmann6];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkId::Branin => "branin",
            BenchmarkId::LogBranin1d => "log_branin_1d",
            BenchmarkId::Hartmann6 => "hartmann6",
        }
    }
}

/// An objective over a box with a known global minimum.
#[derive(Debug, Clone)]
pub struct Benchmark {
    id: BenchmarkId,
    space: SearchSpace,
    known_minimum: f64,
    minimizers: Vec<Vec<f64>>,
}

impl Benchmark {
    pub fn new(id: BenchmarkId) -> Self {
        let (space, known_minimum, minimizers) = match id {
            BenchmarkId::Branin => (
                SearchSpace::from_bounds(&BRANIN_BOUNDS),
                5.0 / (4.0 * PI),
                vec![vec![-PI, 12.275], vec![PI, 2.275], vec![9.424_777_960_769_38, 2.475]],
            ),
            BenchmarkId::LogBranin1d => (
                SearchSpace::from_bounds(&BRANIN_BOUNDS[..1]),
                log_branin_raw(PI),
                vec![vec![PI]],
            ),
            BenchmarkId::Hartmann6 => (
                Ok(SearchSpace::unit(6)),
                HARTMANN6_MINIMUM,
                vec![HARTMANN6_MINIMIZER.to_vec()],
            ),
        };
        let space = match space {
            Ok(s) => s,
            Err(e) => unreachable!("benchmark boxes are valid: {e}"),
        };
        Self {
            id,
            space,
            known_minimum,
            minimizers,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        BenchmarkId::ALL
            .into_iter()
            .find(|id| id.name() == name.to_ascii_lowercase().replace('-', "_"))
            .map(Self::new)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown benchmark '{name}' (known: branin, log_branin_1d, hartmann6)"
                ))
            })
    }

    pub fn id(&self) -> BenchmarkId {
        self.id
    }

    pub fn name(&self) -> &'static str {
        self.id.name()
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn known_minimum(&self) -> f64 {
        self.known_minimum
    }

    pub fn minimizers(&self) -> &[Vec<f64>] {
        &self.minimizers
    }

    /// The optimum used to center synthetic priors (one of Branin's three).
    pub fn prior_optimum(&self) -> &[f64] {
        match self.id {
            BenchmarkId::Branin => &self.minimizers[1],
            _ => &self.minimizers[0],
        }
    }

    /// Objective without the bounds check.
    pub fn value_unchecked(&self, x: &[f64]) -> f64 {
        match self.id {
            BenchmarkId::Branin => branin_raw(x[0], x[1]),
            BenchmarkId::LogBranin1d => log_branin_raw(x[0]),
            BenchmarkId::Hartmann6 => hartmann6_raw(x),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.space.check(x)?;
        Ok(self.value_unchecked(x))
    }

    pub fn simple_regret(&self, y: f64) -> f64 {
        y - self.known_minimum
    }

    /// Cached empirical maximizer, identical for every caller.
    pub fn empirical_maximizer(&self) -> &'static (Vec<f64>, f64) {
        static CACHE: [OnceLock<(Vec<f64>, f64)>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = BenchmarkId::ALL.iter().position(|b| *b == self.id).expect("known id");
        CACHE[slot].get_or_init(|| empirical_max(self, &mut ChaCha8Rng::seed_from_u64(EMPIRICAL_MAX_SEED)))
    }
}

const EMPIRICAL_MAX_SEED: u64 = 0x5_EED0_F3A4;
const EMPIRICAL_MAX_SAMPLES: usize = 100_000;

/// Argmax over uniform samples, refined by compass search.
pub fn empirical_max<R: Rng + ?Sized>(bench: &Benchmark, rng: &mut R) -> (Vec<f64>, f64) {
    let space = bench.space();
    let mut best = space.sample_uniform(rng);
    let mut best_v = bench.value_unchecked(&best);
    for _ in 1..EMPIRICAL_MAX_SAMPLES {
        let x = space.sample_uniform(rng);
        let v = bench.value_unchecked(&x);
        if v > best_v {
            best = x;
            best_v = v;
        }
    }
    let (lo, hi): (Vec<f64>, Vec<f64>) = space.bounds().iter().copied().unzip();
    let step: Vec<f64> = (0..space.dim()).map(|i| 0.01 * space.range(i)).collect();
    let res = compass_maximize(|x| bench.value_unchecked(x), &best, &lo, &hi, &step, 10_000, 1e-12);
    if res.value > best_v {
        (res.x, res.value)
    } else {
        (best, best_v)
    }
}

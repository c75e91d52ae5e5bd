use rand::Rng;
use rand_distr::StandardNormal;

use super::functions::{ei, pi, ts_values, ucb_min};
use super::{AcquisitionKind, AcquisitionSpec};
use crate::domain::SearchSpace;
use crate::error::Result;
use crate::search::compass_maximize;
use crate::surrogate::FittedSurrogate;

/// Candidate-set composition for acquisition maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateBudget {
    pub uniform: usize,
    pub prior: usize,
    pub local: usize,
    /// Per-dimension perturbation scale around the incumbent, unit-cube units.
    pub local_sd: f64,
    pub refine_top: usize,
    pub refine_steps: usize,
}

impl Default for CandidateBudget {
    fn default() -> Self {
        Self {
            uniform: 1024,
            prior: 512,
            local: 64,
            local_sd: 0.05,
            refine_top: 8,
            refine_steps: 100,
        }
    }
}

impl CandidateBudget {
    /// Scales the three candidate sources to a total of `total`, keeping
    /// their proportions (used for joint Thompson draws).
    fn scaled_to(&self, total: usize) -> (usize, usize, usize) {
        let all = (self.uniform + self.prior + self.local).max(1);
        if total >= all {
            return (self.uniform, self.prior, self.local);
        }
        let prior = self.prior * total / all;
        let local = self.local * total / all;
        (total - prior - local, prior, local)
    }
}

/// What the maximizer needs to know about the current state.
#[derive(Debug, Clone, Copy)]
pub struct AcquisitionContext<'a> {
    pub model: &'a FittedSurrogate,
    pub space: &'a SearchSpace,
    /// Incumbent value in the units the model was fit on.
    pub incumbent_value: f64,
    /// Incumbent location in unit-cube coordinates.
    pub incumbent_point: Option<&'a [f64]>,
    /// BO iteration, counted from 1.
    pub iteration: usize,
}

/// A scored candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Unit-cube coordinates.
    pub unit: Vec<f64>,
    /// Working coordinates.
    pub point: Vec<f64>,
    /// Raw acquisition value.
    pub alpha: f64,
    /// `log pi_n(x)`, zero when unweighted.
    pub log_weight: f64,
    /// `log alpha + log pi_n`, `-inf` when `alpha == 0`.
    pub score: f64,
}

impl Candidate {
    /// `alpha * pi_n(x)` in linear space.
    pub fn weighted_value(&self) -> f64 {
        if self.alpha > 0.0 {
            self.score.exp()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct Proposal {
    pub best: Candidate,
    /// Number of maximizers the winner was drawn from.
    pub ties: usize,
    /// Best score among the raw (unrefined) candidates.
    pub best_raw_score: f64,
    pub candidates: Vec<Candidate>,
}

fn score(alpha: f64, log_weight: f64) -> f64 {
    if alpha > 0.0 {
        alpha.ln() + log_weight
    } else {
        f64::NEG_INFINITY
    }
}

fn pointwise_alpha(spec: &AcquisitionSpec, ctx: &AcquisitionContext<'_>, u: &[f64]) -> f64 {
    let (m, v) = ctx.model.predict(u);
    let sd = v.sqrt();
    match spec.kind {
        AcquisitionKind::Ei => ei(m, sd, ctx.incumbent_value),
        AcquisitionKind::Pi => pi(m, sd, ctx.incumbent_value),
        AcquisitionKind::Ucb => ucb_min(m - ctx.incumbent_value, sd, spec.ucb_kappa),
        AcquisitionKind::Ts => unreachable!("thompson values are drawn jointly"),
    }
}

fn log_weight(spec: &AcquisitionSpec, x: &[f64], n: usize) -> Result<f64> {
    match &spec.prior_weighting {
        Some(w) => w.log_weight(x, n),
        None => Ok(0.0),
    }
}

/// Generates the candidate set in unit-cube coordinates.
fn candidate_points<R: Rng + ?Sized>(
    spec: &AcquisitionSpec,
    ctx: &AcquisitionContext<'_>,
    counts: (usize, usize, usize),
    local_sd: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let (n_uniform, n_prior, n_local) = counts;
    let space = ctx.space;
    let mut out = Vec::with_capacity(n_uniform + n_prior + n_local);
    for _ in 0..n_uniform {
        out.push(space.to_unit(&space.sample_uniform(rng)));
    }
    for _ in 0..n_prior {
        let x = match &spec.prior_weighting {
            Some(w) => w.prior.sample(rng)?,
            None => space.sample_uniform(rng),
        };
        out.push(space.to_unit(&x));
    }
    if let Some(inc) = ctx.incumbent_point {
        for _ in 0..n_local {
            out.push(
                inc.iter()
                    .map(|v| (v + local_sd * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0))
                    .collect(),
            );
        }
    }
    Ok(out)
}

/// Index of a maximal score, drawn uniformly among exact ties, and the
/// number of tied entries. `scores` must be non-empty.
pub fn pick_maximizer<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> (usize, usize) {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == top).collect();
    (ties[rng.random_range(0..ties.len())], ties.len())
}

/// Maximizes the (optionally prior-weighted) acquisition function.
///
/// Candidates come from uniform sampling, the prior, and Gaussian
/// perturbations of the incumbent. For EI/PI/UCB on a GP the best few are
/// refined by compass search; Thompson sampling and tree surrogates stay on
/// the candidate set. The winner is drawn uniformly among exact maximizers.
pub fn maximize<R: Rng + ?Sized>(
    spec: &AcquisitionSpec,
    ctx: &AcquisitionContext<'_>,
    budget: &CandidateBudget,
    rng: &mut R,
) -> Result<Proposal> {
    let n = ctx.iteration.max(1);
    let space = ctx.space;
    let counts = if spec.kind == AcquisitionKind::Ts {
        budget.scaled_to(spec.ts_candidate_count.max(1))
    } else {
        (budget.uniform, budget.prior, budget.local)
    };
    let units = candidate_points(spec, ctx, counts, budget.local_sd, rng)?;
    let alphas: Vec<f64> = match spec.kind {
        AcquisitionKind::Ts => ts_values(ctx.model, &units, rng)?,
        _ => units.iter().map(|u| pointwise_alpha(spec, ctx, u)).collect(),
    };
    let mut candidates = Vec::with_capacity(units.len() + budget.refine_top);
    for (unit, alpha) in units.into_iter().zip(alphas) {
        let point = space.from_unit(&unit);
        let lw = log_weight(spec, &point, n)?;
        candidates.push(Candidate {
            score: score(alpha, lw),
            unit,
            point,
            alpha,
            log_weight: lw,
        });
    }
    let best_raw_score = candidates
        .iter()
        .map(|c| c.score)
        .fold(f64::NEG_INFINITY, f64::max);

    let refine = spec.kind != AcquisitionKind::Ts && !ctx.model.is_forest();
    let mut pool = candidates.clone();
    if refine && budget.refine_top > 0 {
        let mut order: Vec<usize> = (0..candidates.len())
            .filter(|&i| candidates[i].score.is_finite())
            .collect();
        order.sort_by(|&a, &b| candidates[b].score.total_cmp(&candidates[a].score));
        let mut starts: Vec<usize> = Vec::new();
        for i in order {
            if starts.len() >= budget.refine_top {
                break;
            }
            if starts.iter().all(|&j| candidates[j].unit != candidates[i].unit) {
                starts.push(i);
            }
        }
        let d = space.dim();
        let (lo, hi, step) = (vec![0.0; d], vec![1.0; d], vec![budget.local_sd; d]);
        for i in starts {
            let res = compass_maximize(
                |u| {
                    let alpha = pointwise_alpha(spec, ctx, u);
                    let x = space.from_unit(u);
                    log_weight(spec, &x, n).map_or(f64::NEG_INFINITY, |lw| score(alpha, lw))
                },
                &candidates[i].unit,
                &lo,
                &hi,
                &step,
                budget.refine_steps.max(1),
                1e-7,
            );
            if res.value > candidates[i].score {
                let point = space.from_unit(&res.x);
                let alpha = pointwise_alpha(spec, ctx, &res.x);
                let lw = log_weight(spec, &point, n)?;
                pool.push(Candidate {
                    score: score(alpha, lw),
                    unit: res.x,
                    point,
                    alpha,
                    log_weight: lw,
                });
            }
        }
    }

    let scores: Vec<f64> = pool.iter().map(|c| c.score).collect();
    let (pick, ties) = pick_maximizer(&scores, rng);
    Ok(Proposal {
        best: pool[pick].clone(),
        ties,
        best_raw_score,
        candidates,
    })
}

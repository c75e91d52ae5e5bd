//! Computable pieces of the regret bound for prior-weighted EI: the loss
//! factor `C = (max pi / min pi)^(beta / n)`, its sensitivity grid, and a
//! numerical check of the sandwich inequality behind it.

use crate::acquisition::{ei, DecaySchedule};
use crate::domain::{Prior, SearchSpace};
use crate::error::{Error, Result};
use crate::surrogate::GpPosterior;

/// Location and value of the largest and smallest prior density found.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityExtrema {
    pub max: f64,
    pub argmax: Vec<f64>,
    pub min: f64,
    pub argmin: Vec<f64>,
}

impl DensityExtrema {
    pub fn ratio(&self) -> f64 {
        self.max / self.min
    }
}

/// Default lattice resolution per dimension.
pub fn default_resolution(dim: usize) -> usize {
    match dim {
        1 => 4096,
        2..=4 => 64,
        // Keep the lattice near 2^20 points.
        d => ((1u64 << 20) as f64).powf(1.0 / d as f64).floor().max(2.0) as usize,
    }
}

fn lattice(space: &SearchSpace, resolution: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    let d = space.dim();
    let total = resolution.pow(d as u32);
    (0..total).map(move |mut k| {
        (0..d)
            .map(|i| {
                let j = k % resolution;
                k /= resolution;
                let (l, u) = space.bounds()[i];
                l + (u - l) * j as f64 / (resolution - 1) as f64
            })
            .collect()
    })
}

/// Extremes of the prior density over a uniform lattice plus the prior mode
/// and the box corners.
pub fn density_extrema(prior: &Prior, resolution: Option<usize>) -> DensityExtrema {
    let space = prior.space();
    let res = resolution.unwrap_or_else(|| default_resolution(space.dim())).max(2);
    let probes = lattice(space, res)
        .chain(std::iter::once(prior.mode()))
        .chain(space.corners());
    let mut ext = DensityExtrema {
        max: f64::NEG_INFINITY,
        argmax: Vec::new(),
        min: f64::INFINITY,
        argmin: Vec::new(),
    };
    for x in probes {
        let v = prior.density(&x).expect("probe lies in the box");
        if v > ext.max {
            ext.max = v;
            ext.argmax = x.clone();
        }
        if v < ext.min {
            ext.min = v;
            ext.argmin = x;
        }
    }
    ext
}

/// `ratio^(beta / n)`.
pub fn c_from_ratio(ratio: f64, beta: f64, n: u64) -> f64 {
    ratio.powf(beta / n as f64)
}

#[derive(Debug, Clone)]
pub struct BoundQuery<'a> {
    pub prior: &'a Prior,
    pub beta: f64,
    pub n: u64,
    /// Lattice points per dimension; `None` picks [`default_resolution`].
    pub grid_resolution: Option<usize>,
}

/// The loss factor `C_{pi,n}` for a prior.
pub fn c_pi_n(q: &BoundQuery<'_>) -> Result<f64> {
    if q.n == 0 {
        return Err(Error::Domain("iteration must be >= 1".into()));
    }
    if !(q.beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {}", q.beta)));
    }
    if q.grid_resolution.is_some_and(|r| r < 2) {
        return Err(Error::Domain("grid resolution must be >= 2".into()));
    }
    let ext = density_extrema(q.prior, q.grid_resolution);
    Ok(c_from_ratio(ext.ratio(), q.beta, q.n))
}

/// How densities entering the ratio are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundConvention {
    /// Truncation-normalized density plus the epsilon floor.
    Normalized,
    /// Plain Gaussian ratio between mode and box edge, no floor.
    Unnormalized,
}

/// `C_{pi,n}` over a grid of centered 1-D Gaussian priors on the unit box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundGrid {
    /// Prior widths as a fraction of the domain.
    pub sigmas: Vec<f64>,
    pub betas: Vec<f64>,
    pub n: u64,
    /// `normalized[i][j]` is for `sigmas[i]`, `betas[j]`.
    pub normalized: Vec<Vec<f64>>,
    pub unnormalized: Vec<Vec<f64>>,
}

impl BoundGrid {
    pub fn values(&self, convention: BoundConvention) -> &[Vec<f64>] {
        match convention {
            BoundConvention::Normalized => &self.normalized,
            BoundConvention::Unnormalized => &self.unnormalized,
        }
    }

    /// Fraction of cells whose factor does not exceed `threshold`.
    pub fn fraction_at_most(&self, threshold: f64, convention: BoundConvention) -> f64 {
        let cells = self.values(convention).iter().flatten();
        let total = self.sigmas.len() * self.betas.len();
        cells.filter(|c| **c <= threshold).count() as f64 / total as f64
    }

    /// CSV matrix: a header row of betas, then one row per sigma.
    pub fn to_csv(&self, convention: BoundConvention) -> String {
        let mut out = String::from("sigma\\beta");
        for b in &self.betas {
            out.push_str(&format!(",{b}"));
        }
        out.push('\n');
        for (s, row) in self.sigmas.iter().zip(self.values(convention)) {
            out.push_str(&s.to_string());
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Mode-to-edge log density ratio of an untruncated Gaussian centered in the unit box.
fn centered_log_ratio(sigma: f64) -> f64 {
    0.25 / (2.0 * sigma * sigma)
}

pub fn bound_grid(sigmas: &[f64], betas: &[f64], n: u64) -> Result<BoundGrid> {
    if sigmas.is_empty() || betas.is_empty() {
        return Err(Error::Config("bound grid needs at least one sigma and one beta".into()));
    }
    if n == 0 {
        return Err(Error::Domain("iteration must be >= 1".into()));
    }
    let space = SearchSpace::unit(1);
    let mut normalized = Vec::with_capacity(sigmas.len());
    let mut unnormalized = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let prior = Prior::gaussian(space.clone(), &[0.5], &[sigma])?;
        let ratio = density_extrema(&prior, None).ratio();
        let lr = centered_log_ratio(sigma);
        let mut row_n = Vec::with_capacity(betas.len());
        let mut row_u = Vec::with_capacity(betas.len());
        for &beta in betas {
            if !(beta > 0.0) {
                return Err(Error::Domain(format!("beta must be positive, got {beta}")));
            }
            row_n.push(c_from_ratio(ratio, beta, n));
            row_u.push((beta / n as f64 * lr).exp());
        }
        normalized.push(row_n);
        unnormalized.push(row_u);
    }
    Ok(BoundGrid {
        sigmas: sigmas.to_vec(),
        betas: betas.to_vec(),
        n,
        normalized,
        unnormalized,
    })
}

/// Result of checking `min pi_n * EI <= EI_pi <= max pi_n * EI` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub points: usize,
    /// Points whose relative violation exceeds `1e-12`.
    pub violations: usize,
    pub max_relative_violation: f64,
    pub min_weight: f64,
    pub min_location: Vec<f64>,
    pub max_weight: f64,
    pub max_location: Vec<f64>,
}

pub const SANDWICH_TOLERANCE: f64 = 1e-12;

/// Evaluates prior-weighted EI through the same log-space path the
/// maximizer uses and checks it against the bounds implied by the extreme
/// decayed prior values on `grid`.
pub fn verify_sandwich(
    gp: &GpPosterior,
    prior: &Prior,
    schedule: DecaySchedule,
    n: usize,
    grid: &[Vec<f64>],
    incumbent: f64,
) -> Result<SandwichReport> {
    if grid.is_empty() {
        return Err(Error::Config("sandwich check needs a non-empty grid".into()));
    }
    let gamma = schedule.gamma(n);
    let mut eis = Vec::with_capacity(grid.len());
    let mut weights = Vec::with_capacity(grid.len());
    let mut weighted = Vec::with_capacity(grid.len());
    for x in grid {
        let (m, v) = gp.predict(x);
        let a = ei(m, v.sqrt(), incumbent);
        let lw = gamma * prior.log_density(x)?;
        eis.push(a);
        weights.push(lw.exp());
        weighted.push(if a > 0.0 { (a.ln() + lw).exp() } else { 0.0 });
    }
    let (imin, imax) = weights.iter().enumerate().fold((0, 0), |(lo, hi), (i, w)| {
        (
            if *w < weights[lo] { i } else { lo },
            if *w > weights[hi] { i } else { hi },
        )
    });
    let (wmin, wmax) = (weights[imin], weights[imax]);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for ((a, w), _) in eis.iter().zip(&weighted).zip(grid) {
        let lower = wmin * a;
        let upper = wmax * a;
        let scale = w.abs().max(f64::MIN_POSITIVE);
        let v = ((lower - w) / scale).max((w - upper) / scale).max(0.0);
        if v > SANDWICH_TOLERANCE {
            violations += 1;
        }
        worst = worst.max(v);
    }
    Ok(SandwichReport {
        points: grid.len(),
        violations,
        max_relative_violation: worst,
        min_weight: wmin,
        min_location: grid[imin].clone(),
        max_weight: wmax,
        max_location: grid[imax].clone(),
    })
}

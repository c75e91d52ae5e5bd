//! Search spaces, priors over the location of the optimum, and the
//! synthetic prior-construction protocol used by the benchmarks.
//!
//! Points handed around the crate live in *working* coordinates: linear
//! dimensions keep their natural value, log-scaled dimensions are stored as
//! `log10` of the natural value. Priors are defined in working coordinates.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{norm_pdf, normal_interval_mass};

/// Default additive floor keeping every prior strictly positive.
pub const EPSILON_FLOOR: f64 = 1e-12;

/// Rejection attempts allowed per dimension before sampling gives up.
pub const MAX_REJECTIONS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    /// Lower bound in natural units.
    pub lower: f64,
    /// Upper bound in natural units.
    pub upper: f64,
    #[serde(default)]
    pub scale: Scale,
}

impl Dimension {
    pub fn linear(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            scale: Scale::Linear,
        }
    }

    pub fn log(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            scale: Scale::Log,
        }
    }

    fn to_working(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        }
    }

    fn to_natural(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => v,
            Scale::Log => 10f64.powf(v),
        }
    }
}

/// Axis-aligned box with per-dimension linear or log scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    dims: Vec<Dimension>,
    working: Vec<(f64, f64)>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Config("search space needs at least one dimension".into()));
        }
        for (i, d) in dims.iter().enumerate() {
            if !(d.lower.is_finite() && d.upper.is_finite()) || d.lower >= d.upper {
                return Err(Error::Config(format!(
                    "dimension '{}' has invalid bounds [{}, {}]",
                    d.name, d.lower, d.upper
                )));
            }
            if d.scale == Scale::Log && d.lower <= 0.0 {
                return Err(Error::Config(format!(
                    "log-scaled dimension '{}' needs a positive lower bound",
                    d.name
                )));
            }
            if dims[..i].iter().any(|o| o.name == d.name) {
                return Err(Error::Config(format!("duplicate dimension name '{}'", d.name)));
            }
        }
        let working = dims
            .iter()
            .map(|d| (d.to_working(d.lower), d.to_working(d.upper)))
            .collect();
        Ok(Self { dims, working })
    }

    /// Linear box from `(lower, upper)` pairs, dimensions named `x0`, `x1`, ...
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            bounds
                .iter()
                .enumerate()
                .map(|(i, &(l, u))| Dimension::linear(format!("x{i}"), l, u))
                .collect(),
        )
    }

    pub fn unit(dim: usize) -> Self {
        Self::from_bounds(&vec![(0.0, 1.0); dim]).expect("unit box is valid")
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    /// Bounds in working coordinates.
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.working
    }

    pub fn range(&self, i: usize) -> f64 {
        let (l, u) = self.working[i];
        u - l
    }

    pub fn center(&self) -> Vec<f64> {
        self.working.iter().map(|(l, u)| 0.5 * (l + u)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.working)
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, space has {}",
                x.len(),
                self.dim()
            )));
        }
        if !self.contains(x) {
            return Err(Error::Domain(format!("point {x:?} lies outside the search space")));
        }
        Ok(())
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(&self.working) {
            *v = v.clamp(*l, *u);
        }
    }

    /// Working coordinates to the unit cube (clamped to `[0, 1]`).
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.working)
            .map(|(v, (l, u))| ((v - l) / (u - l)).clamp(0.0, 1.0))
            .collect()
    }

    /// Unit cube to working coordinates (clamped to the box).
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.working)
            .map(|(t, (l, h))| (l + t * (h - l)).clamp(*l, *h))
            .collect()
    }

    pub fn to_natural(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.dims).map(|(v, d)| d.to_natural(*v)).collect()
    }

    pub fn to_working(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.dims).map(|(v, d)| d.to_working(*v)).collect()
    }

    /// Uniform draw in working coordinates.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.working
            .iter()
            .map(|(l, u)| l + rng.random::<f64>() * (u - l))
            .collect()
    }

    /// All `2^d` corners of the box.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| {
                        let (l, u) = self.working[i];
                        if mask >> i & 1 == 1 {
                            u
                        } else {
                            l
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// One factor of a product prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PriorComponent {
    TruncatedGaussian { mu: f64, sigma: f64 },
    Uniform,
}

/// Product density over a search space, truncated to the box and floored
/// at `epsilon_floor`.
#[derive(Debug, Clone)]
pub struct Prior {
    space: SearchSpace,
    components: Vec<PriorComponent>,
    epsilon_floor: f64,
    // Per-dimension normalizer: in-box Gaussian mass, or the range for uniforms.
    norm: Vec<f64>,
}

impl Prior {
    pub fn new(space: SearchSpace, components: Vec<PriorComponent>) -> Result<Self> {
        if components.len() != space.dim() {
            return Err(Error::Config(format!(
                "prior has {} components for a {}-dimensional space",
                components.len(),
                space.dim()
            )));
        }
        let mut norm = Vec::with_capacity(components.len());
        for (i, c) in components.iter().enumerate() {
            let (l, u) = space.bounds()[i];
            match *c {
                PriorComponent::TruncatedGaussian { mu, sigma } => {
                    if !mu.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
                        return Err(Error::Config(format!(
                            "gaussian prior on dimension {i} needs finite mu and sigma > 0 (got mu={mu}, sigma={sigma})"
                        )));
                    }
                    let mass = normal_interval_mass(mu, sigma, l, u);
                    if !(mass > 0.0) {
                        return Err(Error::Config(format!(
                            "gaussian prior on dimension {i} (mu={mu}, sigma={sigma}) has no mass inside [{l}, {u}]"
                        )));
                    }
                    norm.push(mass);
                }
                PriorComponent::Uniform => norm.push(u - l),
            }
        }
        Ok(Self {
            space,
            components,
            epsilon_floor: EPSILON_FLOOR,
            norm,
        })
    }

    pub fn uniform(space: SearchSpace) -> Self {
        let n = space.dim();
        Self::new(space, vec![PriorComponent::Uniform; n]).expect("uniform prior is valid")
    }

    pub fn gaussian(space: SearchSpace, mus: &[f64], sigmas: &[f64]) -> Result<Self> {
        if mus.len() != sigmas.len() {
            return Err(Error::Config("mu and sigma lists differ in length".into()));
        }
        let comps = mus
            .iter()
            .zip(sigmas)
            .map(|(&mu, &sigma)| PriorComponent::TruncatedGaussian { mu, sigma })
            .collect();
        Self::new(space, comps)
    }

    pub fn with_epsilon_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::Config("epsilon floor must be positive".into()));
        }
        self.epsilon_floor = floor;
        Ok(self)
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn components(&self) -> &[PriorComponent] {
        &self.components
    }

    pub fn epsilon_floor(&self) -> f64 {
        self.epsilon_floor
    }

    /// True when every factor is uniform, i.e. the density is constant.
    pub fn is_flat(&self) -> bool {
        self.components
            .iter()
            .all(|c| matches!(c, PriorComponent::Uniform))
    }

    fn product_density(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(x)
            .zip(&self.norm)
            .map(|((c, &v), &z)| match *c {
                PriorComponent::TruncatedGaussian { mu, sigma } => {
                    norm_pdf((v - mu) / sigma) / (sigma * z)
                }
                PriorComponent::Uniform => 1.0 / z,
            })
            .product()
    }

    /// Truncation-normalized density plus the epsilon floor.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.space.check(x)?;
        Ok(self.product_density(x) + self.epsilon_floor)
    }

    /// Natural log of [`Prior::density`].
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.density(x).map(f64::ln)
    }

    /// `density(x)^gamma`, the decayed prior.
    pub fn decayed_density(&self, x: &[f64], gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::Domain(format!("decay exponent must be >= 0, got {gamma}")));
        }
        if gamma == 0.0 {
            self.space.check(x)?;
            return Ok(1.0);
        }
        Ok(self.density(x)?.powf(gamma))
    }

    /// Per-dimension mode clipped into the box; uniform factors use the box center.
    pub fn mode(&self) -> Vec<f64> {
        self.components
            .iter()
            .zip(self.space.bounds())
            .map(|(c, &(l, u))| match *c {
                PriorComponent::TruncatedGaussian { mu, .. } => mu.clamp(l, u),
                PriorComponent::Uniform => 0.5 * (l + u),
            })
            .collect()
    }

    /// Draws from the truncated prior by rejecting out-of-box draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        self.components
            .iter()
            .zip(self.space.bounds())
            .enumerate()
            .map(|(i, (c, &(l, u)))| match *c {
                PriorComponent::Uniform => Ok(l + rng.random::<f64>() * (u - l)),
                PriorComponent::TruncatedGaussian { mu, sigma } => {
                    for _ in 0..MAX_REJECTIONS {
                        let z: f64 = rng.sample(StandardNormal);
                        let v = mu + sigma * z;
                        if v >= l && v <= u {
                            return Ok(v);
                        }
                    }
                    Err(Error::Config(format!(
                        "prior on dimension {i} accepted nothing in {MAX_REJECTIONS} draws \
                         (acceptance rate below 1e-6; mass is essentially outside the box)"
                    )))
                }
            })
            .collect()
    }
}

/// Synthetic prior quality used by the benchmark protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorQuality {
    Strong,
    Weak,
    Wrong,
}

impl PriorQuality {
    pub const STRONG_FRACTION: f64 = 0.01;
    pub const WEAK_FRACTION: f64 = 0.10;

    /// Prior width as a fraction of each dimension's range.
    pub fn width_fraction(self) -> f64 {
        match self {
            PriorQuality::Strong | PriorQuality::Wrong => Self::STRONG_FRACTION,
            PriorQuality::Weak => Self::WEAK_FRACTION,
        }
    }
}

impl std::str::FromStr for PriorQuality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strong" => Ok(Self::Strong),
            "weak" => Ok(Self::Weak),
            "wrong" => Ok(Self::Wrong),
            other => Err(Error::Config(format!("unknown prior quality '{other}'"))),
        }
    }
}

const MEAN_REDRAWS: usize = 1000;

/// Builds a Gaussian prior of the requested quality.
///
/// Strong and weak priors are centered on `optimum` plus Gaussian offset
/// noise with the same width as the prior; offsets that land outside the box
/// are re-drawn (up to 1000 times, then clipped). Wrong priors sit exactly on
/// `empirical_max` with the strong width and no offset.
pub fn construct_synthetic_prior<R: Rng + ?Sized>(
    space: &SearchSpace,
    optimum: &[f64],
    empirical_max: &[f64],
    quality: PriorQuality,
    rng: &mut R,
) -> Result<Prior> {
    space.check(optimum)?;
    space.check(empirical_max)?;
    let frac = quality.width_fraction();
    let mut mus = Vec::with_capacity(space.dim());
    let mut sigmas = Vec::with_capacity(space.dim());
    for i in 0..space.dim() {
        let (l, u) = space.bounds()[i];
        let sigma = frac * space.range(i);
        let mu = match quality {
            PriorQuality::Wrong => empirical_max[i],
            PriorQuality::Strong | PriorQuality::Weak => {
                let mut accepted = None;
                for _ in 0..MEAN_REDRAWS {
                    let eps: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                    let m = optimum[i] + eps;
                    if m >= l && m <= u {
                        accepted = Some(m);
                        break;
                    }
                }
                accepted.unwrap_or_else(|| optimum[i].clamp(l, u))
            }
        };
        mus.push(mu);
        sigmas.push(sigma);
    }
    Prior::gaussian(space.clone(), &mus, &sigmas)
}

//! Random-forest regressor with piecewise-constant predictions.

use rand::seq::index::sample;
use rand::Rng;

use super::gp::ObservationSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub trees: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
    /// Split dimensions considered per node; `None` uses all dimensions for
    /// `d <= 3` and `ceil(sqrt(d))` otherwise.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 10,
            min_leaf: 1,
            bootstrap: true,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    Split {
        dim: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    dim,
                    threshold,
                    left,
                    right,
                } => i = if x[dim] <= threshold { left } else { right },
            }
        }
    }

    fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

struct Builder<'a, R: ?Sized> {
    data: &'a ObservationSet,
    min_leaf: usize,
    features: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng + ?Sized> Builder<'_, R> {
    fn build(&mut self, idx: &mut [usize]) -> usize {
        let ys = &self.data.values;
        let n = idx.len();
        let mean = idx.iter().map(|&i| ys[i]).sum::<f64>() / n as f64;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(mean));
        if n < 2 * self.min_leaf || idx.iter().all(|&i| ys[i] == ys[idx[0]]) {
            return id;
        }
        let Some((dim, threshold)) = self.best_split(idx) else {
            return id;
        };
        let pts = &self.data.points;
        idx.sort_by(|&a, &b| pts[a][dim].total_cmp(&pts[b][dim]));
        let cut = idx.partition_point(|&i| pts[i][dim] <= threshold);
        let (l, r) = idx.split_at_mut(cut);
        let left = self.build(l);
        let right = self.build(r);
        self.nodes[id] = Node::Split {
            dim,
            threshold,
            left,
            right,
        };
        id
    }

    // Best variance-reducing midpoint split over a random subset of dimensions.
    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, f64)> {
        let d = self.data.points[0].len();
        let dims: Vec<usize> = if self.features >= d {
            (0..d).collect()
        } else {
            sample(self.rng, d, self.features).into_vec()
        };
        let ys = &self.data.values;
        let total: f64 = idx.iter().map(|&i| ys[i]).sum();
        let n = idx.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for dim in dims {
            let pts = &self.data.points;
            order.sort_by(|&a, &b| pts[a][dim].total_cmp(&pts[b][dim]));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += ys[order[k]];
                let (a, b) = (pts[order[k]][dim], pts[order[k + 1]][dim]);
                let nl = k + 1;
                if a == b || nl < self.min_leaf || n - nl < self.min_leaf {
                    continue;
                }
                // Maximizing this is equivalent to minimizing the children's SSE.
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / nl as f64 + right_sum * right_sum / (n - nl) as f64;
                if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                    best = Some((score, dim, 0.5 * (a + b)));
                }
            }
        }
        best.map(|(_, dim, t)| (dim, t))
    }
}

/// Ensemble of regression trees; predictive mean and variance are taken
/// across trees.
#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<Tree>,
}

impl ForestModel {
    pub fn fit<R: Rng + ?Sized>(data: &ObservationSet, config: &ForestConfig, rng: &mut R) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::Config("forest needs at least two observations".into()));
        }
        if config.trees == 0 || config.min_leaf == 0 {
            return Err(Error::Config("forest needs trees >= 1 and min_leaf >= 1".into()));
        }
        let d = data.points[0].len();
        let features = config
            .max_features
            .unwrap_or(if d <= 3 { d } else { (d as f64).sqrt().ceil() as usize })
            .clamp(1, d);
        let n = data.len();
        let mut trees = Vec::with_capacity(config.trees);
        for _ in 0..config.trees {
            let mut idx: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut b = Builder {
                data,
                min_leaf: config.min_leaf,
                features,
                rng: &mut *rng,
                nodes: Vec::new(),
            };
            b.build(&mut idx);
            trees.push(Tree { nodes: b.nodes });
        }
        Ok(Self { trees })
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.trees.iter().map(Tree::leaves).sum()
    }

    pub fn tree_predictions(&self, x: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.predict(x)).collect()
    }

    /// Mean and (population) variance of the per-tree predictions.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let preds = self.tree_predictions(x);
        let t = preds.len() as f64;
        let mean = preds.iter().sum::<f64>() / t;
        let var = preds.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / t;
        (mean, var)
    }
}

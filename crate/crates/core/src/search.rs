//! Bounded compass (pattern) search, used wherever a small derivative-free
//! local maximizer is needed.

/// Outcome of a compass search.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Maximizes `f` over the box `[lower, upper]` starting from `x0`.
///
/// Each sweep polls `x +/- step_i e_i` and moves greedily on strict
/// improvement; a sweep without improvement halves every step. Stops after
/// `max_evals` evaluations (including the start) or once all steps fall
/// below `min_step`.
pub fn compass_maximize<F>(
    mut f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    initial_step: &[f64],
    max_evals: usize,
    min_step: f64,
) -> SearchResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut x: Vec<f64> = x0
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (l, u))| v.clamp(*l, *u))
        .collect();
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = initial_step.to_vec();
    let mut trial = x.clone();
    'outer: while evals < max_evals && step.iter().any(|s| *s >= min_step) {
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                if evals >= max_evals {
                    break 'outer;
                }
                trial.copy_from_slice(&x);
                trial[i] = (x[i] + sign * step[i]).clamp(lower[i], upper[i]);
                if trial[i] == x[i] {
                    continue;
                }
                let ft = f(&trial);
                evals += 1;
                if ft > fx {
                    x.copy_from_slice(&trial);
                    fx = ft;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    SearchResult {
        x,
        value: fx,
        evaluations: evals,
    }
}

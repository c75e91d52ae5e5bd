//! Dense symmetric positive-definite helpers on row-major `Vec<f64>` storage.

/// Lower-triangular Cholesky factor of an `n x n` SPD matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes `a + shift * I`. Returns the index of the failing pivot on error.
    pub fn factor(a: &[f64], n: usize, shift: f64) -> Result<Self, usize> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                if i == j {
                    sum += shift;
                }
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                sum -= ri.iter().zip(rj).map(|(p, q)| p * q).sum::<f64>();
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(i);
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Factor entry `L[i][j]`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// Solves `L z = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(p, q)| p * q).sum();
            b[i] = (b[i] - s) / self.l[i * n + i];
        }
    }

    /// Solves `L^T z = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `(L L^T) z = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut z = b.to_vec();
        self.solve_lower_in_place(&mut z);
        self.solve_upper_in_place(&mut z);
        z
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.at(i, i).ln()).sum::<f64>()
    }

    /// `L v`, used to turn white noise into a correlated draw.
    pub fn mul_lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.l[i * n..i * n + i + 1]
                    .iter()
                    .zip(v)
                    .map(|(p, q)| p * q)
                    .sum()
            })
            .collect()
    }
}

/// Factorizes with escalating diagonal jitter: first `base` alone, then
/// `base + 1e-10`, `base + 1e-9`, ... up to `base + 1e-4`.
/// Returns the factor and the jitter that was needed.
pub fn factor_with_jitter(a: &[f64], n: usize, base: f64) -> Result<(Cholesky, f64), String> {
    let mut last_pivot = 0;
    for jitter in std::iter::once(0.0).chain((0..7).map(|k| 1e-10 * 10f64.powi(k))) {
        match Cholesky::factor(a, n, base + jitter) {
            Ok(c) => return Ok((c, jitter)),
            Err(p) => last_pivot = p,
        }
    }
    let (dmin, dmax) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let d = a[i * n + i];
        (lo.min(d), hi.max(d))
    });
    Err(format!(
        "cholesky failed at pivot {last_pivot} of {n} with jitter up to 1e-4 \
         (diagonal range [{dmin:.3e}, {dmax:.3e}], noise {base:.3e})"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_matrix() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let c = Cholesky::factor(&a, 3, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| c.at(i, k) * c.at(j, k)).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        let x = c.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn jitter_rescues_singular_matrix() {
        let a = [1.0, 1.0, 1.0, 1.0];
        assert!(Cholesky::factor(&a, 2, 0.0).is_err());
        let (_, jitter) = factor_with_jitter(&a, 2, 0.0).unwrap();
        assert!(jitter > 0.0 && jitter <= 1e-4);
    }

    #[test]
    fn hopeless_matrix_reports_diagnostics() {
        let a = [1.0, 0.0, 0.0, -1.0];
        let err = factor_with_jitter(&a, 2, 0.0).unwrap_err();
        assert!(err.contains("pivot 1"));
    }
}

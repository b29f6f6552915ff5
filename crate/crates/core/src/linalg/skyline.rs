use crate::error::{Error, Result};
use crate::Real;

/// Symmetric matrix stored by its lower envelope, factorized in place by
/// Cholesky (the envelope admits no fill outside itself).
#[derive(Clone, Debug)]
pub struct SkylineMatrix<T> {
    first: Vec<usize>,
    rows: Vec<Vec<T>>,
    factored: bool,
}

impl<T: Real> SkylineMatrix<T> {
    /// `first[i]` is the first column stored in row `i` (`first[i] <= i`).
    pub fn new(first: Vec<usize>) -> Self {
        let rows = first.iter().enumerate().map(|(i, &f)| vec![T::zero(); i - f + 1]).collect();
        Self { first, rows, factored: false }
    }

    pub fn n(&self) -> usize {
        self.first.len()
    }

    /// Adds `v` to entry `(i, j)`; the transposed entry is implied.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let f = self.first[i];
        assert!(j >= f, "entry ({i},{j}) outside envelope");
        self.rows[i][j - f] += v;
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        let f = self.first[i];
        if j < f {
            T::zero()
        } else {
            self.rows[i][j - f]
        }
    }

    pub fn factor(&mut self) -> Result<()> {
        self.factor_impl(None).map(|_| ())
    }

    /// Cholesky for interior-point normal matrices: a pivot that has lost all
    /// significant digits (below `rel · a_ii`) is replaced by a huge value,
    /// which zeroes the corresponding solution component. Returns the number
    /// of replaced pivots.
    pub fn factor_guarded(&mut self, rel: T) -> Result<usize> {
        self.factor_impl(Some(rel))
    }

    fn factor_impl(&mut self, guard: Option<T>) -> Result<usize> {
        let n = self.n();
        let mut replaced = 0;
        for i in 0..n {
            let fi = self.first[i];
            for j in fi..=i {
                let fj = self.first[j];
                let lo = fi.max(fj);
                let mut s = self.rows[i][j - fi];
                for k in lo..j {
                    s -= self.at(i, k) * self.at(j, k);
                }
                if j == i {
                    let a = self.rows[i][j - fi];
                    match guard {
                        Some(rel) if !(s > rel * a) => {
                            s = T::lit(1e64);
                            replaced += 1;
                        }
                        _ if !(s > T::zero()) => return Err(Error::Breakdown("envelope Cholesky")),
                        _ => {}
                    }
                    self.rows[i][j - fi] = s.sqrt();
                } else {
                    let d = self.rows[j][j - fj];
                    self.rows[i][j - fi] = s / d;
                }
            }
        }
        self.factored = true;
        Ok(replaced)
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert!(self.factored, "factor() first");
        let n = self.n();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.rows[i][k - fi] * y[k];
            }
            y[i] = s / self.rows[i][i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.rows[i][i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.rows[i][k - fi] * yi;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_pentadiagonal_solve() {
        let n = 40;
        let mut first: Vec<usize> = (0..n).map(|i: usize| i.saturating_sub(2)).collect();
        first[n - 2] = 0;
        first[n - 1] = 0;
        let mut m = SkylineMatrix::<f64>::new(first);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for (off, v) in [(0usize, 6.0), (1, -1.5), (2, 0.7)] {
                let j = (i + off) % n;
                if off == 0 {
                    m.add(i, i, v);
                    dense[i][i] += v;
                } else {
                    m.add(i, j, v);
                    dense[i][j] += v;
                    dense[j][i] += v;
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * x[j]).sum()).collect();
        m.factor().unwrap();
        let got = m.solve(&b);
        assert!(got.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

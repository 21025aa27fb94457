//! Symmetric banded matrices and their Cholesky factors.
//!
//! Only the lower band is stored: row `i` keeps columns `i - bw ..= i`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    // row-major, (bw + 1) entries per row; entry k of row i is column i - bw + k
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBanded { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw + j - i)
    }

    /// Adds `v` to entries `(i, j)` and `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            let mut acc = 0.0;
            for j in j0..i {
                let a = row[self.bw + j - i];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            acc += row[self.bw] * x[i];
            y[i] += acc;
        }
        y
    }

    /// `xᵀ M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let my = self.matvec(y);
        x.iter().zip(&my).map(|(a, b)| a * b).sum()
    }

    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        let mut l = self.data.clone();
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                // L[i][j] = (A[i][j] - Σ_k L[i][k] L[j][k]) / L[j][j]
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = l[i * w + bw + j - i];
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k0..j {
                    s -= l[ri + k] * l[rj + k];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::LinearSolve(format!(
                            "matrix not positive definite at row {i} (pivot {s:e})"
                        )));
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + bw + j - i] = s / l[j * w + bw];
                }
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }
}

/// Lower factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let w = self.bw + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            let row = &self.l[i * w..(i + 1) * w];
            let mut s = x[i];
            for j in j0..i {
                s -= row[self.bw + j - i] * x[j];
            }
            x[i] = s / row[self.bw];
        }
        for i in (0..self.n).rev() {
            let xi = x[i] / self.l[i * w + self.bw];
            x[i] = xi;
            let j0 = i.saturating_sub(self.bw);
            let row = &self.l[i * w..(i + 1) * w];
            for j in j0..i {
                x[j] -= row[self.bw + j - i] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymBanded {
        let mut m = SymBanded::zeros(n, 1);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i + 1 < n {
                m.add(i + 1, i, -1.0);
            }
        }
        m
    }

    #[test]
    fn tridiagonal_solve() {
        let m = laplacian(6);
        let x: Vec<f64> = (0..6).map(|i| (i as f64 * 0.7).sin() + 1.0).collect();
        let b = m.matvec(&x);
        let y = m.cholesky().unwrap().solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn wide_band_matches_dense_product() {
        let n = 12;
        let bw = 4;
        let mut m = SymBanded::zeros(n, bw);
        for i in 0..n {
            m.add(i, i, 10.0 + i as f64);
            for d in 1..=bw.min(i) {
                m.add(i, i - d, 1.0 / (1.0 + d as f64 + i as f64));
            }
        }
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 3.5).collect();
        let dense: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| m.get(i, j) * x[j]).sum())
            .collect();
        let mv = m.matvec(&x);
        for (a, b) in dense.iter().zip(&mv) {
            assert!((a - b).abs() < 1e-12);
        }
        let y = m.cholesky().unwrap().solve(&mv);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut m = laplacian(3);
        m.add(1, 1, -5.0);
        assert!(matches!(m.cholesky(), Err(Error::LinearSolve(_))));
    }
}

//! Dense symmetric linear algebra, spectra, and seeded random streams.

mod eigen;
mod rng;
mod spectrum;

pub use eigen::{cholesky, generalized_sym_eig, sign_normalize, sym_eig, EigenPairs};
pub use rng::Rng;
pub use spectrum::{dft_magnitude, Spectrum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry check on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense square matrix with symmetric contents, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from row-major data, rejecting asymmetric input. Entries are
    /// averaged with their transpose so the stored matrix is exactly symmetric.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("matrix dimension must be at least 1"));
        }
        if data.len() != n * n {
            return Err(Error::validation(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite matrix entry {bad}")));
        }
        let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut m = SymMatrix { n, data };
        for i in 0..n {
            for j in (i + 1)..n {
                let a = m.data[i * n + j];
                let b = m.data[j * n + i];
                if (a - b).abs() > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::validation(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                let avg = 0.5 * (a + b);
                m.data[i * n + j] = avg;
                m.data[j * n + i] = avg;
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::validation("rows must form a square matrix"));
        }
        Self::from_row_major(n, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        SymMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Adds `v` to both (i,j) and (j,i) (once on the diagonal).
    pub fn add_symmetric(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j) == 0.0))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    pub(crate) fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sample covariance (divisor n-1) of the rows of `x`, with the column means.
pub fn covariance(x: &[Vec<f64>]) -> Result<(Vec<f64>, SymMatrix)> {
    let n = x.len();
    if n < 2 {
        return Err(Error::validation("covariance needs at least two samples"));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::validation("covariance rows must share a nonzero length"));
    }
    let mean = column_means(x);
    let centered: Vec<Vec<f64>> = x
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let s: f64 = centered.iter().map(|r| r[i] * r[j]).sum::<f64>() / (n - 1) as f64;
            data[i * d + j] = s;
            data[j * d + i] = s;
        }
    }
    Ok((mean, SymMatrix { n: d, data }))
}

pub fn column_means(x: &[Vec<f64>]) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; d];
    for r in x {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    let n = x.len().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

//! Reference computations shared by the integration tests and the
//! acceptance binary. Nothing here calls into the code path it checks.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use cylfault::mlp::scg::Objective;
use cylfault::numerics::{Rng, SymMatrix};

pub fn to_dmatrix(a: &SymMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.n(), a.n(), a.as_slice())
}

/// `B Bᵀ + n·I` with `B` uniform in [-1, 1].
pub fn random_spd(n: usize, rng: &mut Rng) -> SymMatrix {
    let b = DMatrix::from_fn(n, n, |_, _| rng.uniform_in(-1.0, 1.0));
    let a = &b * b.transpose() + DMatrix::identity(n, n) * n as f64;
    SymMatrix::from_row_major(n, a.transpose().as_slice().to_vec()).unwrap()
}

/// Generalized eigenvalues of `(K, M)` from nalgebra: eigenvalues of
/// `L⁻¹ K L⁻ᵀ` with `M = L Lᵀ`, ascending.
pub fn reference_generalized_eigenvalues(k: &SymMatrix, m: &SymMatrix) -> Vec<f64> {
    let l = to_dmatrix(m).cholesky().expect("M must be SPD").l();
    let l_inv = l.try_inverse().unwrap();
    let c = &l_inv * to_dmatrix(k) * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut v: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Worst `‖Kφ − λMφ‖ / ‖Kφ‖` and worst `|φᵢᵀ M φⱼ − δᵢⱼ|`.
pub fn generalized_residuals(k: &SymMatrix, m: &SymMatrix, values: &[f64], vectors: &[Vec<f64>]) -> (f64, f64) {
    let kd = to_dmatrix(k);
    let md = to_dmatrix(m);
    let mut residual: f64 = 0.0;
    for (lam, v) in values.iter().zip(vectors) {
        let phi = DVector::from_column_slice(v);
        let kphi = &kd * &phi;
        let r = &kphi - (&md * &phi) * *lam;
        residual = residual.max(r.norm() / kphi.norm());
    }
    let mut orth: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let g = (DVector::from_column_slice(a).transpose() * &md * DVector::from_column_slice(b))[(0, 0)];
            let target = if i == j { 1.0 } else { 0.0 };
            orth = orth.max((g - target).abs());
        }
    }
    (residual, orth)
}

/// Exact optimum of the soft-margin dual by enumerating every
/// (at-zero, at-C, free) assignment and solving the equality-constrained
/// stationarity system on the free set.
pub fn brute_force_dual_optimum(kernel: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * kernel[i][j]);
    let objective = |alpha: &DVector<f64>| alpha.sum() - 0.5 * (alpha.transpose() * &q * alpha)[(0, 0)];
    let mut best = f64::NEG_INFINITY;
    let mut states = vec![0u8; n];
    for code in 0..3usize.pow(n as u32) {
        let mut rest = code;
        for s in states.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| states[i] == 2).collect();
        let mut alpha = DVector::from_fn(n, |i, _| if states[i] == 1 { c } else { 0.0 });
        if free.is_empty() {
            let balance: f64 = (0..n).map(|i| alpha[i] * y[i]).sum();
            if balance.abs() < 1e-9 {
                best = best.max(objective(&alpha));
            }
            continue;
        }
        // Stationarity on the free set with multiplier ν for Σ αᵢ yᵢ = 0:
        // Q_FF α_F + ν y_F = 1 − Q_FB α_B,  y_Fᵀ α_F = −y_Bᵀ α_B.
        let f = free.len();
        let mut a = DMatrix::zeros(f + 1, f + 1);
        let mut rhs = DVector::zeros(f + 1);
        for (r, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                a[(r, s)] = q[(i, j)];
            }
            a[(r, f)] = y[i];
            a[(f, r)] = y[i];
            rhs[r] = 1.0 - (0..n).filter(|j| states[*j] == 1).map(|j| q[(i, j)] * c).sum::<f64>();
        }
        rhs[f] = -(0..n).filter(|j| states[*j] == 1).map(|j| y[j] * c).sum::<f64>();
        let svd = a.clone().svd(true, true);
        let Ok(sol) = svd.solve(&rhs, 1e-12) else { continue };
        if (&a * &sol - &rhs).norm() > 1e-8 * (1.0 + rhs.norm()) {
            continue;
        }
        let mut feasible = true;
        for (r, &i) in free.iter().enumerate() {
            let v = sol[r];
            if !(-1e-12..=c + 1e-12).contains(&v) {
                feasible = false;
                break;
            }
            alpha[i] = v.clamp(0.0, c);
        }
        if feasible {
            best = best.max(objective(&alpha));
        }
    }
    best
}

pub struct SvmProblem {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub c: f64,
    pub rbf_gamma: Option<f64>,
}

/// Problem `index` of the fixed 6-point suite: points uniform in
/// [-2, 2]², both classes present, alternating linear and RBF kernels.
pub fn svm_problem(index: u64) -> SvmProblem {
    let mut rng = Rng::new(0x5eed_0000 + index);
    loop {
        let x: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.uniform_in(-2.0, 2.0), rng.uniform_in(-2.0, 2.0)]).collect();
        let y: Vec<f64> = (0..6).map(|_| if rng.uniform() < 0.5 { -1.0 } else { 1.0 }).collect();
        if y.contains(&1.0) && y.contains(&-1.0) {
            return SvmProblem {
                x,
                y,
                c: if index % 3 == 0 { 10.0 } else { 1.0 },
                rbf_gamma: if index % 2 == 0 { None } else { Some(0.5) },
            };
        }
    }
}

/// `½‖Aw − b‖² / rows`.
pub struct LeastSquares {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl LeastSquares {
    pub fn random(rows: usize, cols: usize, rng: &mut Rng) -> Self {
        let a: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| rng.normal()).collect()).collect();
        let b = (0..rows).map(|_| rng.normal()).collect();
        LeastSquares { a, b }
    }

    /// Solution of `AᵀA w = Aᵀb`.
    pub fn normal_equations(&self) -> Vec<f64> {
        let a = DMatrix::from_fn(self.a.len(), self.a[0].len(), |i, j| self.a[i][j]);
        let b = DVector::from_column_slice(&self.b);
        let ata = a.transpose() * &a;
        let atb = a.transpose() * b;
        ata.cholesky().expect("full column rank").solve(&atb).iter().copied().collect()
    }
}

impl Objective for LeastSquares {
    fn dim(&self) -> usize {
        self.a[0].len()
    }

    fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let n = self.a.len() as f64;
        let mut grad = vec![0.0; w.len()];
        let mut loss = 0.0;
        for (row, bi) in self.a.iter().zip(&self.b) {
            let r: f64 = row.iter().zip(w).map(|(a, x)| a * x).sum::<f64>() - bi;
            loss += 0.5 * r * r;
            for (g, a) in grad.iter_mut().zip(row) {
                *g += r * a / n;
            }
        }
        (loss / n, grad)
    }
}

/// Central differences with step `h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, w: &[f64], h: f64) -> Vec<f64> {
    let mut p = w.to_vec();
    (0..w.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Confusion counts of the published GMM result, actual rows and predicted
/// columns in `[000],[100],[010],[001],[110],[101],[011],[111]` order.
pub const PUBLISHED_GMM_COUNTS: [[usize; 8]; 8] = [
    [39, 0, 0, 0, 0, 0, 0, 0],
    [0, 3, 0, 0, 0, 0, 0, 0],
    [0, 0, 3, 0, 0, 0, 0, 0],
    [0, 0, 0, 3, 0, 0, 0, 1],
    [0, 0, 0, 0, 3, 0, 0, 1],
    [0, 0, 0, 0, 0, 3, 0, 0],
    [0, 0, 0, 0, 0, 0, 3, 2],
    [0, 0, 0, 0, 0, 0, 0, 35],
];

/// Gaussian clusters: `per` samples around each center with unit-scaled spread.
pub fn clusters(centers: &[Vec<f64>], per: usize, spread: f64, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut x = Vec::new();
    for c in centers {
        for _ in 0..per {
            x.push(c.iter().map(|v| v + spread * rng.normal()).collect());
        }
    }
    x
}

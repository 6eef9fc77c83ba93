//! SMO for the soft-margin dual
//!
//! ```text
//! max  Σ αᵢ − ½ Σᵢⱼ αᵢ αⱼ yᵢ yⱼ k(xᵢ, xⱼ)
//! s.t. 0 ≤ αᵢ ≤ C,  Σ αᵢ yᵢ = 0
//! ```
//!
//! Internally the equivalent minimization `½ αᵀQα − Σα` with
//! `Qᵢⱼ = yᵢ yⱼ Kᵢⱼ` is solved by updating the maximally KKT-violating pair
//! at each step. The gradient `G = Qα − 1` is kept up to date, which makes
//! the violation test `max_{I_up} −yG − min_{I_low} −yG ≤ tol` and the
//! objective `½ Σ αᵢ (1 − Gᵢ)` O(n).

use crate::error::{Error, Result};

/// Curvature used in place of a non-positive `Kᵢᵢ + Kⱼⱼ − 2Kᵢⱼ`.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Final maximal violation `m(α) − M(α)`.
    pub gap: f64,
    /// Dual objective before the first step and after each step.
    pub objective: Vec<f64>,
}

/// Solves the dual for a precomputed kernel matrix (`kernel[i][j]`).
pub fn solve_dual(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> Result<DualSolution> {
    let n = y.len();
    if kernel.len() != n || kernel.iter().any(|r| r.len() != n) {
        return Err(Error::validation("kernel matrix must be n×n for n labels"));
    }
    if !(c > 0.0) || !(tol > 0.0) {
        return Err(Error::validation("C and tol must be positive"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::validation("labels must be +1 or -1"));
    }
    if n < 2 || !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::validation("both classes must be present"));
    }

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let objective_of = |alpha: &[f64], grad: &[f64]| -> f64 {
        0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>()
    };
    let mut objective = vec![0.0];
    let mut iterations = 0;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt < 0.0 && a < c) || (yt > 0.0 && a > 0.0);

    loop {
        let mut i = usize::MAX;
        let mut m_up = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let f = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && f > m_up {
                m_up = f;
                i = t;
            }
            if in_low(alpha[t], y[t]) && f < m_low {
                m_low = f;
                j = t;
            }
        }
        let gap = m_up - m_low;
        if i == usize::MAX || j == usize::MAX || gap <= tol {
            let bias = bias_from(&alpha, &grad, y, c, m_up, m_low);
            return Ok(DualSolution {
                alphas: alpha,
                bias,
                iterations,
                gap: gap.max(0.0),
                objective,
            });
        }
        if iterations >= max_iter {
            return Err(Error::Convergence { iterations, gap, tol });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kernel[t][i] * di + y[j] * kernel[t][j] * dj);
        }
        objective.push(objective_of(&alpha, &grad));
    }
}

/// Average of `−yG` over free multipliers, or the midpoint of the
/// feasible interval when none are free.
fn bias_from(alpha: &[f64], grad: &[f64], y: &[f64], c: f64, m_up: f64, m_low: f64) -> f64 {
    let free: Vec<f64> = (0..alpha.len())
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c)
        .map(|t| -y[t] * grad[t])
        .collect();
    if free.is_empty() {
        0.5 * (m_up + m_low)
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    }
}

/// Dual objective `Σα − ½ αᵀQα` evaluated directly.
pub fn dual_objective(kernel: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

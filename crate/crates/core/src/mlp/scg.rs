//! Scaled conjugate gradient.
//!
//! Conjugate directions with a step length from a finite-difference
//! estimate of the curvature along the direction, `s = (∇E(w + σp) − ∇E(w)) / σ`.
//! A Levenberg-Marquardt style scalar `λ` keeps the curvature term positive
//! and is raised or lowered by comparing the actual loss reduction with the
//! quadratic model prediction (`Δ`). No line search is performed.

use crate::error::{Error, Result};
use crate::numerics::dot;

/// Differentiable scalar objective over a flat parameter vector.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>);

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.value_and_gradient(w).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScgOptions {
    pub max_iters: usize,
    /// Stop when the gradient norm falls below this.
    pub grad_tol: f64,
    /// Base finite-difference step for the curvature estimate.
    pub sigma: f64,
    pub lambda_init: f64,
}

impl Default for ScgOptions {
    fn default() -> Self {
        ScgOptions {
            max_iters: 500,
            grad_tol: 1e-6,
            sigma: 1e-4,
            lambda_init: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScgOutcome {
    pub weights: Vec<f64>,
    /// Loss at the start and after every accepted step.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ScgOutcome {
    pub fn final_loss(&self) -> f64 {
        *self.history.last().expect("history starts with the initial loss")
    }
}

const LAMBDA_MAX: f64 = 1e100;

/// Minimizes `objective` from `start`.
pub fn minimize<O: Objective + ?Sized>(objective: &O, start: &[f64], opts: &ScgOptions) -> Result<ScgOutcome> {
    let n = objective.dim();
    if start.len() != n {
        return Err(Error::validation(format!(
            "start has {} parameters, objective expects {n}",
            start.len()
        )));
    }
    let mut w = start.to_vec();
    let (mut loss, mut grad) = objective.value_and_gradient(&w);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Divergence {
            iteration: 0,
            last_loss: loss,
            last_good: w,
        });
    }
    let mut history = vec![loss];
    let mut r: Vec<f64> = grad.iter().map(|g| -g).collect();
    if dot(&r, &r).sqrt() < opts.grad_tol {
        return Ok(ScgOutcome {
            weights: w,
            history,
            iterations: 0,
            converged: true,
        });
    }

    let mut p = r.clone();
    let mut success = true;
    let mut lambda = opts.lambda_init;
    let mut lambda_bar = 0.0;
    let mut delta = 0.0;
    let mut accepted = 0usize;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iters {
        iterations += 1;
        let p_sq = dot(&p, &p);
        if p_sq == 0.0 {
            break;
        }

        if success {
            let sigma_k = opts.sigma / p_sq.sqrt();
            let probe: Vec<f64> = w.iter().zip(&p).map(|(wi, pi)| wi + sigma_k * pi).collect();
            let g_probe = objective.gradient(&probe);
            delta = g_probe
                .iter()
                .zip(&grad)
                .zip(&p)
                .map(|((gp, g), pi)| pi * (gp - g) / sigma_k)
                .sum();
        }

        // Scale, then force positive curvature.
        delta += (lambda - lambda_bar) * p_sq;
        if delta <= 0.0 {
            lambda_bar = 2.0 * (lambda - delta / p_sq);
            delta = -delta + lambda * p_sq;
            lambda = lambda_bar;
        }

        let mu = dot(&p, &r);
        if mu <= 0.0 {
            // Not a descent direction any more: restart along the gradient.
            p = r.clone();
            success = true;
            continue;
        }
        let alpha = mu / delta;
        let trial: Vec<f64> = w.iter().zip(&p).map(|(wi, pi)| wi + alpha * pi).collect();
        let (trial_loss, trial_grad) = objective.value_and_gradient(&trial);
        if !trial_loss.is_finite() || !delta.is_finite() {
            return Err(Error::Divergence {
                iteration: iterations,
                last_loss: loss,
                last_good: w,
            });
        }

        let comparison = 2.0 * delta * (loss - trial_loss) / (mu * mu);
        if comparison >= 0.0 {
            w = trial;
            loss = trial_loss;
            grad = trial_grad;
            history.push(loss);
            let r_new: Vec<f64> = grad.iter().map(|g| -g).collect();
            lambda_bar = 0.0;
            success = true;
            accepted += 1;
            if accepted % n == 0 {
                p = r_new.clone();
            } else {
                let beta = (dot(&r_new, &r_new) - dot(&r_new, &r)) / mu;
                for (pi, ri) in p.iter_mut().zip(&r_new) {
                    *pi = ri + beta * *pi;
                }
            }
            r = r_new;
            if comparison >= 0.75 {
                lambda *= 0.25;
            }
        } else {
            lambda_bar = lambda;
            success = false;
        }

        if comparison < 0.25 {
            lambda = (lambda + delta * (1.0 - comparison) / p_sq).min(LAMBDA_MAX);
        }

        if dot(&r, &r).sqrt() < opts.grad_tol {
            converged = true;
            break;
        }
    }

    Ok(ScgOutcome {
        weights: w,
        history,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f(w) = Σ cᵢ (wᵢ − 1)²
    struct Bowl(Vec<f64>);

    impl Objective for Bowl {
        fn dim(&self) -> usize {
            self.0.len()
        }

        fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
            let v = w.iter().zip(&self.0).map(|(x, c)| c * (x - 1.0).powi(2)).sum();
            let g = w.iter().zip(&self.0).map(|(x, c)| 2.0 * c * (x - 1.0)).collect();
            (v, g)
        }
    }

    /// Rosenbrock, non-convex.
    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }

        fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
            let (x, y) = (w[0], w[1]);
            let v = (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2);
            let g = vec![
                -2.0 * (1.0 - x) - 400.0 * x * (y - x * x),
                200.0 * (y - x * x),
            ];
            (v, g)
        }
    }

    #[test]
    fn separable_bowl() {
        let out = minimize(&Bowl(vec![1.0, 10.0, 100.0]), &[0.0; 3], &ScgOptions {
            grad_tol: 1e-10,
            ..Default::default()
        })
        .unwrap();
        assert!(out.converged);
        for w in &out.weights {
            assert!((w - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn at_minimum_terminates_immediately() {
        let out = minimize(&Bowl(vec![1.0, 2.0]), &[1.0, 1.0], &ScgOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.weights, vec![1.0, 1.0]);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn rosenbrock_monotone_and_converges() {
        let out = minimize(&Rosenbrock, &[-1.2, 1.0], &ScgOptions {
            max_iters: 5000,
            grad_tol: 1e-8,
            ..Default::default()
        })
        .unwrap();
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        assert!((out.weights[0] - 1.0).abs() < 1e-5, "{:?}", out.weights);
        assert!((out.weights[1] - 1.0).abs() < 1e-5);
    }

    struct Explodes;

    impl Objective for Explodes {
        fn dim(&self) -> usize {
            1
        }

        fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
            if w[0] > 0.5 {
                (f64::NAN, vec![f64::NAN])
            } else {
                (-w[0], vec![-1.0])
            }
        }
    }

    #[test]
    fn divergence_reports_last_good_state() {
        match minimize(&Explodes, &[0.0], &ScgOptions::default()) {
            Err(Error::Divergence { last_good, last_loss, .. }) => {
                assert!(last_good[0] <= 0.5);
                assert!(last_loss.is_finite());
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}

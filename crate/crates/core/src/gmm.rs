//! Diagonal-covariance Gaussian mixtures fitted by EM, one per fault class.
//!
//! Each class model is `λ = {w, μ, Σ}` with density
//! `p(x|λ) = Σᵢ wᵢ N(x; μᵢ, diag σᵢ²)`. A group of observations is assigned
//! to the class maximizing `Σₖ ln p(xₖ|λ_f)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FaultLabel;
use crate::numerics::Rng;

/// Components with less total responsibility than this keep their previous parameters.
const MIN_COMPONENT_MASS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Per-dimension variances of each component.
    pub variances: Vec<Vec<f64>>,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl GmmModel {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn component_log_pdf(&self, i: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((xd, md), vd) in x.iter().zip(&self.means[i]).zip(&self.variances[i]) {
            acc += vd.ln() + (xd - md) * (xd - md) / vd;
        }
        -0.5 * (x.len() as f64 * TAU.ln() + acc)
    }

    /// `ln wᵢ + ln pᵢ(x)` for every component.
    fn joint_log(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_components())
            .map(|i| self.weights[i].ln() + self.component_log_pdf(i, x))
            .collect()
    }

    /// `ln Σᵢ wᵢ pᵢ(x)`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::validation(format!(
                "mixture has dimension {}, got {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(log_sum_exp(&self.joint_log(x)))
    }

    pub fn log_likelihood(&self, x: &[Vec<f64>]) -> Result<f64> {
        x.iter().map(|xi| self.log_density(xi)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Stop when the log-likelihood gain of an iteration is below this.
    pub tol: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: 200,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub model: GmmModel,
    /// Training log-likelihood after initialization and after each M-step.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
}

/// Fits an `m`-component mixture to the rows of `x`. `floor[d]` bounds
/// every variance in dimension `d` from below.
pub fn fit_em(x: &[Vec<f64>], m: usize, opts: &EmOptions, floor: &[f64], rng: &mut Rng) -> Result<EmFit> {
    let n = x.len();
    if m == 0 {
        return Err(Error::validation("mixture needs at least one component"));
    }
    if n < m {
        return Err(Error::validation(format!("{m} components need at least {m} samples, got {n}")));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::validation("samples must share a nonzero dimension"));
    }
    if floor.len() != d || floor.iter().any(|f| !(*f > 0.0)) {
        return Err(Error::validation("variance floor must be positive in every dimension"));
    }

    let global_mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let global_var: Vec<f64> = (0..d)
        .map(|j| x.iter().map(|r| (r[j] - global_mean[j]).powi(2)).sum::<f64>() / n as f64)
        .collect();

    if x.iter().all(|r| r == &x[0]) {
        log::warn!("all {n} training samples are identical; returning a point mass at the variance floor");
        let model = GmmModel {
            weights: vec![1.0 / m as f64; m],
            means: vec![x[0].clone(); m],
            variances: vec![floor.to_vec(); m],
        };
        let ll = model.log_likelihood(x)?;
        return Ok(EmFit {
            model,
            log_likelihood: vec![ll],
            iterations: 0,
        });
    }

    let mut model = GmmModel {
        weights: vec![1.0 / m as f64; m],
        means: seed_means(x, m, rng),
        variances: vec![global_var.iter().zip(floor).map(|(v, f)| v.max(*f)).collect(); m],
    };

    let mut history = Vec::new();
    let mut resp = vec![vec![0.0; m]; n];
    let mut iterations = 0;
    loop {
        // E-step
        let mut ll = 0.0;
        for (xi, ri) in x.iter().zip(resp.iter_mut()) {
            let joint = model.joint_log(xi);
            let lse = log_sum_exp(&joint);
            ll += lse;
            for (r, j) in ri.iter_mut().zip(&joint) {
                *r = (j - lse).exp();
            }
        }
        if !ll.is_finite() {
            return Err(Error::numeric("EM log-likelihood became non-finite"));
        }
        let improved = history.last().is_none_or(|prev| ll - prev >= opts.tol);
        history.push(ll);
        if !improved || iterations >= opts.max_iter {
            break;
        }

        // M-step
        iterations += 1;
        let mass: Vec<f64> = (0..m).map(|k| resp.iter().map(|r| r[k]).sum()).collect();
        for k in 0..m {
            model.weights[k] = mass[k] / n as f64;
            if mass[k] < MIN_COMPONENT_MASS {
                continue;
            }
            let mut mean = vec![0.0; d];
            for (xi, ri) in x.iter().zip(&resp) {
                for (mj, xj) in mean.iter_mut().zip(xi) {
                    *mj += ri[k] * xj;
                }
            }
            mean.iter_mut().for_each(|v| *v /= mass[k]);
            let mut var = vec![0.0; d];
            for (xi, ri) in x.iter().zip(&resp) {
                for ((vj, xj), mj) in var.iter_mut().zip(xi).zip(&mean) {
                    *vj += ri[k] * (xj - mj) * (xj - mj);
                }
            }
            for (vj, fj) in var.iter_mut().zip(floor) {
                *vj = (*vj / mass[k]).max(*fj);
            }
            model.means[k] = mean;
            model.variances[k] = var;
        }
    }

    Ok(EmFit {
        model,
        log_likelihood: history,
        iterations,
    })
}

/// k-means++ seeding: first center uniform, the rest drawn with
/// probability proportional to squared distance from the nearest center.
fn seed_means(x: &[Vec<f64>], m: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let dist2 = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum() };
    let mut centers = vec![x[rng.index(x.len())].clone()];
    let mut nearest: Vec<f64> = x.iter().map(|xi| dist2(xi, &centers[0])).collect();
    while centers.len() < m {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut chosen = x.len() - 1;
            for (i, w) in nearest.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.index(x.len())
        };
        let c = x[pick].clone();
        for (nd, xi) in nearest.iter_mut().zip(x) {
            *nd = nd.min(dist2(xi, &c));
        }
        centers.push(c);
    }
    centers
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmConfig {
    pub components: usize,
    pub em: EmOptions,
    /// Variance floor as a fraction of the training data's per-dimension variance.
    pub floor_scale: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            components: 2,
            em: EmOptions::default(),
            floor_scale: 1e-6,
        }
    }
}

/// One mixture per fault class, indexed by [`FaultLabel::class_index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmClassifier {
    pub models: Vec<GmmModel>,
}

impl GmmClassifier {
    pub fn train(x: &[Vec<f64>], labels: &[FaultLabel], config: &GmmConfig, rng: &Rng) -> Result<Self> {
        if x.len() != labels.len() || x.len() < 2 {
            return Err(Error::validation("need at least two labeled samples"));
        }
        let d = x[0].len();
        let n = x.len() as f64;
        let floor: Vec<f64> = (0..d)
            .map(|j| {
                let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
                let var = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    config.floor_scale * var
                } else {
                    config.floor_scale
                }
            })
            .collect();
        let per_class: Vec<Vec<Vec<f64>>> = (0..8)
            .map(|c| {
                x.iter()
                    .zip(labels)
                    .filter(|(_, l)| l.class_index() == c)
                    .map(|(xi, _)| xi.clone())
                    .collect()
            })
            .collect();

        let fits: Vec<Result<EmFit>> = std::thread::scope(|scope| {
            let handles: Vec<_> = per_class
                .iter()
                .enumerate()
                .map(|(c, xc)| {
                    let floor = &floor;
                    let mut class_rng = rng.split(c as u64);
                    scope.spawn(move || {
                        if xc.is_empty() {
                            return Err(Error::validation("no training samples"));
                        }
                        fit_em(xc, config.components, &config.em, floor, &mut class_rng)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("EM thread panicked"))
                .collect()
        });
        let models = fits
            .into_iter()
            .enumerate()
            .map(|(c, r)| {
                r.map(|f| f.model).map_err(|e| match e {
                    Error::Validation(msg) => Error::Validation(format!(
                        "class {}: {msg}",
                        FaultLabel::from_class_index(c).expect("index < 8")
                    )),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GmmClassifier { models })
    }

    /// Summed log-likelihood of the group under each class model.
    pub fn scores(&self, group: &[Vec<f64>]) -> Result<Vec<f64>> {
        if group.is_empty() {
            return Err(Error::validation("cannot classify an empty group"));
        }
        self.models
            .iter()
            .map(|m| group.iter().map(|x| m.log_density(x)).sum())
            .collect()
    }

    /// Class with the largest summed log-likelihood; ties go to the lowest
    /// class index.
    pub fn classify(&self, group: &[Vec<f64>]) -> Result<FaultLabel> {
        let scores = self.scores(group)?;
        FaultLabel::from_class_index(argmax_first(&scores))
    }

    pub fn classify_one(&self, x: &[f64]) -> Result<FaultLabel> {
        self.classify(std::slice::from_ref(&x.to_vec()))
    }

    pub fn to_json(&self) -> Result<String> {
        crate::harness::io::to_versioned_json("gmm", self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::harness::io::from_versioned_json("gmm", text)
    }
}

pub(crate) fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in v.iter().enumerate() {
        if *s > v[best] {
            best = i;
        }
    }
    best
}

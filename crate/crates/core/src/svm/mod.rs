//! Soft-margin kernel support vector machines.
//!
//! A binary machine predicts `sgn(Σ yᵢ αᵢ k(x, xᵢ) + b)` with the
//! multipliers from [`smo::solve_dual`]. Fault labels are predicted either
//! by one machine per substructure bit (default) or by eight one-vs-rest
//! machines.

mod multilabel;
pub mod smo;

pub use multilabel::{MultiLabelSvm, SvmConfig, SvmStrategy};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::dot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { degree: u32, coef: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { gamma } if !(gamma > 0.0) => {
                Err(Error::validation(format!("rbf gamma must be positive, got {gamma}")))
            }
            Kernel::Polynomial { degree: 0, .. } => Err(Error::validation("polynomial degree must be at least 1")),
            _ => Ok(()),
        }
    }

    /// Kernel value without the dimension check.
    fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Polynomial { degree, coef } => (dot(a, b) + coef).powi(degree as i32),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::validation(format!(
                "kernel arguments differ in dimension ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        Ok(self.eval_unchecked(a, b))
    }

    pub fn gram(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.eval_unchecked(&x[i], &x[j]);
                k[i][j] = v;
                k[j][i] = v;
            }
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryParams {
    pub c: f64,
    pub kernel: Kernel,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BinaryParams {
    fn default() -> Self {
        BinaryParams {
            c: 10.0,
            kernel: Kernel::Linear,
            tol: 1e-3,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    /// One multiplier per training sample.
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Training indices with a positive multiplier.
    pub support: Vec<usize>,
    pub support_vectors: Vec<Vec<f64>>,
    pub support_labels: Vec<f64>,
}

/// Trains one binary machine on labels in {−1, +1}.
pub fn train_binary(x: &[Vec<f64>], y: &[f64], params: &BinaryParams) -> Result<SvmModel> {
    params.kernel.validate()?;
    if x.len() != y.len() {
        return Err(Error::validation("one label per sample required"));
    }
    let d = x.first().map_or(0, Vec::len);
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::validation("samples differ in dimension"));
    }
    let gram = params.kernel.gram(x);
    let sol = smo::solve_dual(&gram, y, params.c, params.tol, params.max_iter)?;
    let support: Vec<usize> = (0..x.len()).filter(|&i| sol.alphas[i] > 0.0).collect();
    Ok(SvmModel {
        kernel: params.kernel,
        c: params.c,
        support_vectors: support.iter().map(|&i| x[i].clone()).collect(),
        support_labels: support.iter().map(|&i| y[i]).collect(),
        alphas: sol.alphas,
        bias: sol.bias,
        support,
    })
}

impl SvmModel {
    /// `Σ_{support} yᵢ αᵢ k(x, xᵢ) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if let Some(sv) = self.support_vectors.first() {
            if sv.len() != x.len() {
                return Err(Error::validation(format!(
                    "model expects dimension {}, got {}",
                    sv.len(),
                    x.len()
                )));
            }
        }
        Ok(self
            .support
            .iter()
            .zip(&self.support_vectors)
            .zip(&self.support_labels)
            .map(|((&i, sv), &yi)| yi * self.alphas[i] * self.kernel.eval_unchecked(x, sv))
            .sum::<f64>()
            + self.bias)
    }

    /// +1 when the decision value is at least zero.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.decision(x)? >= 0.0 { 1.0 } else { -1.0 })
    }

    /// Fraction of samples misclassified (0-1 loss).
    pub fn empirical_risk(&self, x: &[Vec<f64>], y: &[f64]) -> Result<f64> {
        let predicted = x.iter().map(|xi| self.predict(xi)).collect::<Result<Vec<_>>>()?;
        zero_one_risk(&predicted, y)
    }

    /// Largest KKT violation on training data `(x, y)` in terms of `yᵢ f(xᵢ)`.
    pub fn kkt_violation(&self, x: &[Vec<f64>], y: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, (xi, &yi)) in x.iter().zip(y).enumerate() {
            let margin = yi * self.decision(xi)?;
            let a = self.alphas[i];
            let v = if a <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if a >= self.c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            };
            worst = worst.max(v);
        }
        Ok(worst)
    }
}

/// Mean 0-1 loss between predicted and actual labels.
pub fn zero_one_risk<T: PartialEq>(predicted: &[T], actual: &[T]) -> Result<f64> {
    if predicted.len() != actual.len() || actual.is_empty() {
        return Err(Error::validation("risk needs equal-length nonempty label lists"));
    }
    let wrong = predicted.iter().zip(actual).filter(|(p, a)| p != a).count();
    Ok(wrong as f64 / actual.len() as f64)
}

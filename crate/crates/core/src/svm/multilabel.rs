use serde::{Deserialize, Serialize};

use super::{train_binary, BinaryParams, Kernel, SvmModel};
use crate::error::{Error, Result};
use crate::features::FaultLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmStrategy {
    /// One machine per substructure bit.
    Bitwise,
    /// One machine per fault class; the largest decision value wins.
    OneVsRest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    /// `None` selects an RBF kernel with `gamma = 1 / (dim · var(X))`.
    pub kernel: Option<Kernel>,
    pub tol: f64,
    pub max_iter: usize,
    pub strategy: SvmStrategy,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 10.0,
            kernel: None,
            tol: 1e-3,
            max_iter: 1_000_000,
            strategy: SvmStrategy::Bitwise,
        }
    }
}

/// `1 / (dim · var)` with `var` the variance of all entries of `x` pooled.
pub fn default_gamma(x: &[Vec<f64>]) -> f64 {
    let d = x.first().map_or(1, Vec::len).max(1);
    let count = (x.len() * d) as f64;
    let mean = x.iter().flatten().sum::<f64>() / count;
    let var = x.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
    if var > 0.0 {
        1.0 / (d as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelSvm {
    pub strategy: SvmStrategy,
    /// 3 machines (bit order) or 8 (class-index order).
    pub machines: Vec<SvmModel>,
}

impl MultiLabelSvm {
    pub fn train(x: &[Vec<f64>], labels: &[FaultLabel], config: &SvmConfig) -> Result<Self> {
        if x.len() != labels.len() || x.is_empty() {
            return Err(Error::validation("one label per sample required"));
        }
        let kernel = config.kernel.unwrap_or_else(|| Kernel::Rbf { gamma: default_gamma(x) });
        let params = BinaryParams {
            c: config.c,
            kernel,
            tol: config.tol,
            max_iter: config.max_iter,
        };
        let tasks: Vec<(String, Vec<f64>)> = match config.strategy {
            SvmStrategy::Bitwise => (0..3)
                .map(|b| {
                    let y = labels.iter().map(|l| if l.bit(b) { 1.0 } else { -1.0 }).collect();
                    (format!("substructure bit {}", b + 1), y)
                })
                .collect(),
            SvmStrategy::OneVsRest => (0..8)
                .map(|c| {
                    let y = labels
                        .iter()
                        .map(|l| if l.class_index() == c { 1.0 } else { -1.0 })
                        .collect();
                    (format!("class {}", FaultLabel::from_class_index(c).expect("index < 8")), y)
                })
                .collect(),
        };

        // Machines are independent; train them side by side.
        let results: Vec<Result<SvmModel>> = std::thread::scope(|scope| {
            let handles: Vec<_> = tasks
                .iter()
                .map(|(_, y)| scope.spawn(|| train_binary(x, y, &params)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("SVM training thread panicked"))
                .collect()
        });
        let machines = results
            .into_iter()
            .zip(&tasks)
            .map(|(r, (name, _))| {
                r.map_err(|e| match e {
                    Error::Validation(msg) => Error::Validation(format!("{name}: {msg}")),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiLabelSvm {
            strategy: config.strategy,
            machines,
        })
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<FaultLabel> {
        match self.strategy {
            SvmStrategy::Bitwise => {
                let bits = [
                    self.machines[0].predict(x)? > 0.0,
                    self.machines[1].predict(x)? > 0.0,
                    self.machines[2].predict(x)? > 0.0,
                ];
                Ok(FaultLabel::from_bits(bits))
            }
            SvmStrategy::OneVsRest => {
                let mut best = 0;
                let mut best_value = f64::NEG_INFINITY;
                for (c, m) in self.machines.iter().enumerate() {
                    let v = m.decision(x)?;
                    if v > best_value {
                        best_value = v;
                        best = c;
                    }
                }
                FaultLabel::from_class_index(best)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        crate::harness::io::to_versioned_json("svm", self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::harness::io::from_versioned_json("svm", text)
    }
}

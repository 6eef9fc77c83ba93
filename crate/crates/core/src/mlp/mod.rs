//! One-hidden-layer perceptron with tanh hidden units and logistic outputs.
//!
//! `y_k = σ(Σ_j w2[k][j] · tanh(Σ_i w1[j][i] x_i + w1[j][d]) + w2[k][M])`
//!
//! Each weight row stores the input weights followed by the bias. Output
//! `k` predicts fault bit `k`; training minimizes the mean binary
//! cross-entropy with [`scg::minimize`].

pub mod scg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FaultLabel;
use crate::numerics::Rng;
use scg::{minimize, Objective, ScgOptions, ScgOutcome};

const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    /// `hidden × (inputs + 1)`, row-major.
    pub w1: Vec<f64>,
    /// `outputs × (hidden + 1)`, row-major.
    pub w2: Vec<f64>,
}

fn logistic(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

/// Sum that does not depend on the order of `terms`.
fn order_free_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

impl MlpModel {
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> Self {
        MlpModel {
            inputs,
            hidden,
            outputs,
            w1: vec![0.0; hidden * (inputs + 1)],
            w2: vec![0.0; outputs * (hidden + 1)],
        }
    }

    /// Weights uniform in `±1/√fan_in`, biases included.
    pub fn init(inputs: usize, hidden: usize, outputs: usize, rng: &mut Rng) -> Result<Self> {
        if inputs == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::validation("layer sizes must be nonzero"));
        }
        let mut m = Self::zeros(inputs, hidden, outputs);
        let b1 = 1.0 / (inputs as f64).sqrt();
        let b2 = 1.0 / (hidden as f64).sqrt();
        m.w1.iter_mut().for_each(|w| *w = rng.uniform_in(-b1, b1));
        m.w2.iter_mut().for_each(|w| *w = rng.uniform_in(-b2, b2));
        Ok(m)
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.w2.len()
    }

    pub fn params(&self) -> Vec<f64> {
        [self.w1.as_slice(), self.w2.as_slice()].concat()
    }

    pub fn with_params(&self, params: &[f64]) -> Self {
        let (a, b) = params.split_at(self.w1.len());
        MlpModel {
            w1: a.to_vec(),
            w2: b.to_vec(),
            ..self.clone()
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs {
            return Err(Error::validation(format!(
                "network expects {} inputs, got {}",
                self.inputs,
                x.len()
            )));
        }
        Ok(())
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        let stride = self.inputs + 1;
        (0..self.hidden)
            .map(|j| {
                let row = &self.w1[j * stride..(j + 1) * stride];
                let pre: f64 = row[..self.inputs].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + row[self.inputs];
                pre.tanh()
            })
            .collect()
    }

    fn output_activations(&self, h: &[f64]) -> Vec<f64> {
        let stride = self.hidden + 1;
        let mut terms = vec![0.0; self.hidden];
        (0..self.outputs)
            .map(|k| {
                let row = &self.w2[k * stride..(k + 1) * stride];
                for (t, (w, hj)) in terms.iter_mut().zip(row.iter().zip(h)) {
                    *t = w * hj;
                }
                logistic(order_free_sum(&mut terms) + row[self.hidden])
            })
            .collect()
    }

    /// Network outputs, each in (0, 1).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.output_activations(&self.hidden_activations(x)))
    }

    /// Bit `k` is set iff output `k` is at least 0.5.
    pub fn predict(&self, x: &[f64]) -> Result<FaultLabel> {
        if self.outputs != 3 {
            return Err(Error::validation(format!(
                "fault prediction needs 3 outputs, network has {}",
                self.outputs
            )));
        }
        Ok(label_from_outputs(&self.forward(x)?))
    }

    /// Mean cross-entropy over the batch and its exact gradient with
    /// respect to [`params`](Self::params).
    pub fn loss_and_gradient(&self, x: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
        if x.is_empty() || x.len() != targets.len() {
            return Err(Error::validation("batch must be nonempty with one target per input"));
        }
        for (xi, ti) in x.iter().zip(targets) {
            self.check_input(xi)?;
            if ti.len() != self.outputs {
                return Err(Error::validation("target length does not match outputs"));
            }
        }
        Ok(self.loss_and_gradient_unchecked(x, targets))
    }

    fn loss_and_gradient_unchecked(&self, x: &[Vec<f64>], targets: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let n = x.len() as f64;
        let (d, m) = (self.inputs, self.hidden);
        let mut g1 = vec![0.0; self.w1.len()];
        let mut g2 = vec![0.0; self.w2.len()];
        let mut loss = 0.0;
        let mut delta_hidden = vec![0.0; m];
        for (xi, ti) in x.iter().zip(targets) {
            let h = self.hidden_activations(xi);
            let y = self.output_activations(&h);
            delta_hidden.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..self.outputs {
                let yc = y[k].clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                loss -= ti[k] * yc.ln() + (1.0 - ti[k]) * (1.0 - yc).ln();
                let dk = (y[k] - ti[k]) / n;
                let row = k * (m + 1);
                for j in 0..m {
                    g2[row + j] += dk * h[j];
                    delta_hidden[j] += dk * self.w2[row + j];
                }
                g2[row + m] += dk;
            }
            for j in 0..m {
                let dj = delta_hidden[j] * (1.0 - h[j] * h[j]);
                let row = j * (d + 1);
                for i in 0..d {
                    g1[row + i] += dj * xi[i];
                }
                g1[row + d] += dj;
            }
        }
        g1.extend(g2);
        (loss / n, g1)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::harness::io::to_versioned_json("mlp", self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::harness::io::from_versioned_json("mlp", text)
    }
}

pub fn label_from_outputs(y: &[f64]) -> FaultLabel {
    FaultLabel::new(y[0] >= 0.5, y[1] >= 0.5, y[2] >= 0.5)
}

struct CrossEntropy<'a> {
    shape: &'a MlpModel,
    x: &'a [Vec<f64>],
    targets: &'a [Vec<f64>],
}

impl Objective for CrossEntropy<'_> {
    fn dim(&self) -> usize {
        self.shape.n_params()
    }

    fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        self.shape
            .with_params(w)
            .loss_and_gradient_unchecked(self.x, self.targets)
    }
}

/// Trains from `model`'s current weights.
pub fn train_scg(
    model: &MlpModel,
    x: &[Vec<f64>],
    targets: &[Vec<f64>],
    opts: &ScgOptions,
) -> Result<(MlpModel, ScgOutcome)> {
    // Validates shapes once.
    model.loss_and_gradient(x, targets)?;
    let objective = CrossEntropy {
        shape: model,
        x,
        targets,
    };
    let outcome = minimize(&objective, &model.params(), opts)?;
    Ok((model.with_params(&outcome.weights), outcome))
}

/// Trains a fresh `inputs-hidden-3` network on fault labels.
pub fn train_classifier(
    x: &[Vec<f64>],
    labels: &[FaultLabel],
    hidden: usize,
    opts: &ScgOptions,
    rng: &mut Rng,
) -> Result<(MlpModel, ScgOutcome)> {
    let d = x.first().map_or(0, Vec::len);
    let model = MlpModel::init(d, hidden, 3, rng)?;
    let targets: Vec<Vec<f64>> = labels.iter().map(|l| l.as_targets().to_vec()).collect();
    train_scg(&model, x, &targets, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_half() {
        let m = MlpModel::zeros(10, 8, 3);
        assert_eq!(m.forward(&[0.3; 10]).unwrap(), vec![0.5; 3]);
        let (loss, _) = m.loss_and_gradient(&[vec![1.0; 10]], &[vec![1.0, 0.0, 1.0]]).unwrap();
        assert!((loss - 3.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tiny_net_hand_values() {
        let m = MlpModel {
            inputs: 1,
            hidden: 1,
            outputs: 1,
            w1: vec![1.0, 0.0],
            w2: vec![1.0, 0.0],
        };
        assert_eq!(m.forward(&[0.0]).unwrap(), vec![0.5]);
        let y = m.forward(&[1.0]).unwrap()[0];
        // logistic(tanh(1)) = logistic(0.7615941559557649)
        assert!((y - 0.68170).abs() < 1e-4);
        assert!((y - 1.0 / (1.0 + (-(1.0f64).tanh()).exp())).abs() < 1e-15);
    }

    #[test]
    fn predict_thresholds_with_ties_up() {
        assert_eq!(label_from_outputs(&[0.9, 0.1, 0.6]), FaultLabel::new(true, false, true));
        assert_eq!(label_from_outputs(&[0.5, 0.5, 0.5]), FaultLabel::new(true, true, true));
        assert_eq!(MlpModel::zeros(2, 2, 3).predict(&[0.0, 0.0]).unwrap(), FaultLabel::new(true, true, true));
        assert!(MlpModel::zeros(2, 2, 2).predict(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let m = MlpModel::zeros(3, 2, 3);
        assert!(m.forward(&[1.0]).is_err());
        assert!(m.loss_and_gradient(&[], &[]).is_err());
    }

    #[test]
    fn hidden_permutation_is_bit_identical() {
        let mut rng = Rng::new(3);
        let m = MlpModel::init(4, 5, 3, &mut rng).unwrap();
        let perm = [3, 0, 4, 1, 2];
        let mut p = m.clone();
        for (new_j, &old_j) in perm.iter().enumerate() {
            p.w1[new_j * 5..(new_j + 1) * 5].copy_from_slice(&m.w1[old_j * 5..(old_j + 1) * 5]);
            for k in 0..3 {
                p.w2[k * 6 + new_j] = m.w2[k * 6 + old_j];
            }
        }
        for _ in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
            let a = m.forward(&x).unwrap();
            let b = p.forward(&x).unwrap();
            assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn json_round_trip() {
        let m = MlpModel::init(3, 4, 3, &mut Rng::new(8)).unwrap();
        let text = m.to_json().unwrap();
        assert!(text.contains("\"format_version\": 1"));
        assert_eq!(MlpModel::from_json(&text).unwrap(), m);
    }
}

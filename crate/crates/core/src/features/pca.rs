use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{covariance, dot, sym_eig};

/// Principal axes of a training matrix.
///
/// `components[k]` is the unit direction with the k-th largest sample
/// variance, `variances[k]` that variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
}

/// Fits the top `pca_dim` principal components of the rows of `x`.
pub fn fit_pca(x: &[Vec<f64>], pca_dim: usize) -> Result<PcaModel> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(Error::validation(format!("PCA needs at least 2 samples, got {n}")));
    }
    if pca_dim == 0 || pca_dim > n.min(d) {
        return Err(Error::validation(format!(
            "pca_dim must be in 1..={} for {n} samples of dimension {d}, got {pca_dim}",
            n.min(d)
        )));
    }
    let (mean, cov) = covariance(x)?;
    let eig = sym_eig(&cov)?;
    let (variances, components) = eig
        .descending()
        .take(pca_dim)
        .map(|(v, dir)| (v.max(0.0), dir.to_vec()))
        .unzip();
    Ok(PcaModel {
        mean,
        components,
        variances,
    })
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    /// Coordinates of `x - mean` along each component.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::validation(format!(
                "PCA expects dimension {}, got {}",
                self.mean.len(),
                x.len()
            )));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.components.iter().map(|c| dot(c, &centered)).collect())
    }

    pub fn transform_all(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter().map(|r| self.transform(r)).collect()
    }

    pub fn inverse_transform(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.components.len() {
            return Err(Error::validation("coordinate count does not match component count"));
        }
        let mut out = self.mean.clone();
        for (zk, comp) in z.iter().zip(&self.components) {
            for (o, c) in out.iter_mut().zip(comp) {
                *o += zk * c;
            }
        }
        Ok(out)
    }
}

/// Per-column z-scoring with statistics from the fitting data. Constant
/// columns keep unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let n = x.len();
        if n < 2 {
            return Err(Error::validation("standardization needs at least 2 samples"));
        }
        let d = x[0].len();
        if x.iter().any(|r| r.len() != d) {
            return Err(Error::validation("rows must share a length"));
        }
        let mean = crate::numerics::column_means(x);
        let scale = (0..d)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1) as f64;
                let sd = var.sqrt();
                if sd > 1e-12 * mean[j].abs().max(1e-300) {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::validation(format!(
                "standardizer expects dimension {}, got {}",
                self.mean.len(),
                x.len()
            )));
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn transform_all(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter().map(|r| self.transform(r)).collect()
    }
}

/// Raw modal features to classifier inputs: z-score, then PCA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub standardizer: Standardizer,
    pub pca: PcaModel,
}

impl FeaturePipeline {
    pub fn fit(train: &[Vec<f64>], pca_dim: usize) -> Result<Self> {
        let standardizer = Standardizer::fit(train)?;
        let z = standardizer.transform_all(train)?;
        let pca = fit_pca(&z, pca_dim)?;
        Ok(FeaturePipeline { standardizer, pca })
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.pca.transform(&self.standardizer.transform(x)?)
    }

    pub fn transform_all(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter().map(|r| self.transform(r)).collect()
    }
}

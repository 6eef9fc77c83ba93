//! Feature vectors, principal component reduction, and datasets.
//!
//! A raw feature vector is the concatenation
//! `[ω₁ … ω_m, φ₁(1..c), …, φ_m(1..c)]`: the `m` natural frequencies first,
//! then each mode shape's `c` coordinates in mode order. With 17 modes and
//! 19 coordinates that is 340 values.

mod dataset;
mod label;
mod pca;

pub use dataset::{generate_dataset, ClassCounts, Dataset, NoiseConfig, SimulationConfig, Split};
pub use label::FaultLabel;
pub use pca::{fit_pca, FeaturePipeline, PcaModel, Standardizer};

use crate::error::{Error, Result};
use crate::structural::ModalProperties;

/// Flattens modal properties into one raw feature vector.
pub fn assemble_features(modal: &ModalProperties) -> Result<Vec<f64>> {
    let m = modal.n_modes();
    let c = modal.n_coords();
    if m == 0 || modal.shapes.len() != m {
        return Err(Error::validation(format!(
            "expected one shape per frequency, got {} shapes for {m} frequencies",
            modal.shapes.len()
        )));
    }
    if modal.shapes.iter().any(|s| s.len() != c) {
        return Err(Error::validation("mode shapes have differing coordinate counts"));
    }
    let mut out = Vec::with_capacity(m * (c + 1));
    out.extend_from_slice(&modal.frequencies);
    for s in &modal.shapes {
        out.extend_from_slice(s);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("modal properties contain non-finite values"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_layout() {
        let modal = ModalProperties {
            frequencies: vec![1.0, 2.0],
            shapes: vec![vec![11.0, 12.0, 13.0], vec![21.0, 22.0, 23.0]],
        };
        let f = assemble_features(&modal).unwrap();
        assert_eq!(f, vec![1.0, 2.0, 11.0, 12.0, 13.0, 21.0, 22.0, 23.0]);
        assert_eq!(assemble_features(&modal.clone()).unwrap(), f);
    }

    #[test]
    fn full_length_is_340() {
        let modal = ModalProperties {
            frequencies: vec![1.0; 17],
            shapes: vec![vec![0.5; 19]; 17],
        };
        assert_eq!(assemble_features(&modal).unwrap().len(), 340);
    }

    #[test]
    fn shape_mismatch() {
        let modal = ModalProperties {
            frequencies: vec![1.0, 2.0],
            shapes: vec![vec![1.0, 0.0], vec![1.0]],
        };
        assert!(assemble_features(&modal).is_err());
        let modal = ModalProperties {
            frequencies: vec![1.0, 2.0],
            shapes: vec![vec![1.0]],
        };
        assert!(assemble_features(&modal).is_err());
    }
}

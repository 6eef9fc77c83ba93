//! Fault classification for a population of cylinders split into three
//! substructures.
//!
//! The pipeline synthesizes modal data (natural frequencies and mode shapes)
//! from lumped mass-spring rings with stiffness loss in the faulted arcs,
//! reduces the 340 raw modal features to 10 principal components, and
//! classifies the 8 fault scenarios with three models:
//!
//! * [`mlp`]: a one-hidden-layer perceptron trained by scaled conjugate gradient,
//! * [`svm`]: soft-margin kernel machines solved in the dual by SMO,
//! * [`gmm`]: per-class diagonal Gaussian mixtures fitted by EM.
//!
//! [`harness`] drives the experiment and renders confusion matrices.

pub mod error;
pub mod features;
pub mod gmm;
pub mod harness;
pub mod mlp;
pub mod numerics;
pub mod structural;
pub mod svm;

pub use error::{Error, Result};
pub use features::FaultLabel;

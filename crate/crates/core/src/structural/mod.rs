//! Lumped mass-spring stand-in for a cylindrical shell.
//!
//! A cylinder is modeled as `n_dof` point masses joined by springs in a
//! closed ring (free-free support). The springs are split into three equal
//! contiguous arcs, one per substructure; a fault reduces the stiffness of
//! every spring in its arc by a fraction `severity`.

mod impulse;

pub use impulse::impulse_response_and_extract;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FaultLabel;
use crate::numerics::{dot, generalized_sym_eig, norm, sign_normalize, Rng, SymMatrix};

/// Eigenvalues below this fraction of the largest are treated as rigid-body modes.
const RIGID_MODE_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CylinderConfig {
    pub n_dof: usize,
    /// kg per node
    pub base_mass: f64,
    /// N/m per spring
    pub base_stiffness: f64,
    /// Closed chain when true, open free-free chain otherwise.
    pub ring_topology: bool,
    /// Stiffness factor of the last spring (the seam closing the ring),
    /// shared by every specimen. 1 gives a homogeneous ring.
    pub seam_stiffness: f64,
}

impl Default for CylinderConfig {
    fn default() -> Self {
        CylinderConfig {
            n_dof: 19,
            base_mass: 0.5,
            base_stiffness: 2.0e6,
            ring_topology: true,
            seam_stiffness: 1.0,
        }
    }
}

impl CylinderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_dof < 6 {
            return Err(Error::validation(format!("n_dof must be at least 6, got {}", self.n_dof)));
        }
        if !(self.base_mass > 0.0) || !(self.base_stiffness > 0.0) {
            return Err(Error::validation("base mass and stiffness must be positive"));
        }
        if !(self.seam_stiffness > 0.0) {
            return Err(Error::validation(format!(
                "seam stiffness factor must be positive, got {}",
                self.seam_stiffness
            )));
        }
        Ok(())
    }

    pub fn n_springs(&self) -> usize {
        if self.ring_topology {
            self.n_dof
        } else {
            self.n_dof - 1
        }
    }

    /// Substructure (0, 1 or 2) of each spring; spring `j` joins node `j`
    /// to node `j + 1` (mod `n_dof` on a ring).
    pub fn substructure_map(&self) -> Vec<usize> {
        let n = self.n_springs();
        (0..n).map(|j| 3 * j / n).collect()
    }
}

/// Element values of one physical specimen.
#[derive(Debug, Clone, PartialEq)]
pub struct Specimen {
    pub masses: Vec<f64>,
    pub stiffnesses: Vec<f64>,
    pub substructures: Vec<usize>,
    pub ring_topology: bool,
}

impl Specimen {
    /// Nominal specimen: base masses and stiffnesses, the last spring scaled
    /// by the seam factor.
    pub fn nominal(config: &CylinderConfig) -> Result<Self> {
        config.validate()?;
        let mut stiffnesses = vec![config.base_stiffness; config.n_springs()];
        if let Some(seam) = stiffnesses.last_mut() {
            *seam *= config.seam_stiffness;
        }
        Ok(Specimen {
            masses: vec![config.base_mass; config.n_dof],
            stiffnesses,
            substructures: config.substructure_map(),
            ring_topology: config.ring_topology,
        })
    }

    /// Manufacturing spread: every mass and spring independently scaled by
    /// `1 + u`, `u ~ U[-variability, variability]`.
    pub fn sample(config: &CylinderConfig, variability: f64, rng: &mut Rng) -> Result<Self> {
        if !(0.0..0.5).contains(&variability) {
            return Err(Error::validation(format!(
                "population variability must be in [0, 0.5), got {variability}"
            )));
        }
        let mut s = Self::nominal(config)?;
        for m in &mut s.masses {
            *m *= 1.0 + rng.uniform_in(-variability, variability);
        }
        for k in &mut s.stiffnesses {
            *k *= 1.0 + rng.uniform_in(-variability, variability);
        }
        Ok(s)
    }

    pub fn n_dof(&self) -> usize {
        self.masses.len()
    }

    /// The same physical elements moved `shift` nodes around the ring. The
    /// positional substructure map stays put, so the arcs now cover
    /// different springs.
    pub fn rotated(&self, shift: usize) -> Self {
        let rot = |v: &[f64]| -> Vec<f64> {
            let n = v.len();
            (0..n).map(|i| v[(i + n - shift % n) % n]).collect()
        };
        Specimen {
            masses: rot(&self.masses),
            stiffnesses: rot(&self.stiffnesses),
            substructures: self.substructures.clone(),
            ring_topology: self.ring_topology,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultScenario {
    pub label: FaultLabel,
    /// Fractional stiffness loss in each faulted substructure.
    pub severity: f64,
}

impl FaultScenario {
    pub fn new(label: FaultLabel, severity: f64) -> Self {
        FaultScenario { label, severity }
    }

    pub fn healthy() -> Self {
        FaultScenario::new(FaultLabel::HEALTHY, 0.0)
    }
}

/// Natural frequencies (rad/s, ascending) and unit-norm mode shapes, one
/// row per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalProperties {
    pub frequencies: Vec<f64>,
    pub shapes: Vec<Vec<f64>>,
}

impl ModalProperties {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn n_coords(&self) -> usize {
        self.shapes.first().map_or(0, Vec::len)
    }

    /// Flips each shape whose dot product with the same-index reference
    /// shape is negative.
    pub fn align_signs(&mut self, reference: &ModalProperties) -> Result<()> {
        if reference.n_modes() < self.n_modes() || reference.n_coords() != self.n_coords() {
            return Err(Error::validation("reference modes do not cover these modes"));
        }
        for (shape, r) in self.shapes.iter_mut().zip(&reference.shapes) {
            if dot(shape, r) < 0.0 {
                shape.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Ok(())
    }
}

/// Mass and stiffness matrices for `specimen` under `fault`.
pub fn build_system(specimen: &Specimen, fault: &FaultScenario) -> Result<(SymMatrix, SymMatrix)> {
    if !(0.0..1.0).contains(&fault.severity) {
        return Err(Error::validation(format!(
            "fault severity must be in [0, 1), got {}",
            fault.severity
        )));
    }
    let n = specimen.n_dof();
    let expected_springs = if specimen.ring_topology { n } else { n - 1 };
    if specimen.stiffnesses.len() != expected_springs || specimen.substructures.len() != expected_springs {
        return Err(Error::validation("specimen spring arrays do not match its topology"));
    }
    if specimen.masses.iter().chain(&specimen.stiffnesses).any(|v| !(*v > 0.0)) {
        return Err(Error::validation("masses and stiffnesses must be positive"));
    }

    let m = SymMatrix::from_diagonal(&specimen.masses);
    let mut k = SymMatrix::zeros(n);
    for (j, (&kj, &sub)) in specimen.stiffnesses.iter().zip(&specimen.substructures).enumerate() {
        let kj = if fault.label.bit(sub) {
            kj * (1.0 - fault.severity)
        } else {
            kj
        };
        let (a, b) = (j, (j + 1) % n);
        k.add_symmetric(a, a, kj);
        k.add_symmetric(b, b, kj);
        k.add_symmetric(a, b, -kj);
    }
    Ok((m, k))
}

/// First `n_modes` elastic modes of `K φ = ω² M φ`. Rigid-body modes are
/// dropped before counting.
pub fn solve_modes(m: &SymMatrix, k: &SymMatrix, n_modes: usize) -> Result<ModalProperties> {
    if n_modes == 0 || n_modes > k.n() {
        return Err(Error::validation(format!(
            "n_modes must be in 1..={}, got {n_modes}",
            k.n()
        )));
    }
    let pairs = generalized_sym_eig(k, m)?;
    let top = pairs.values.last().copied().unwrap_or(0.0).max(0.0);
    let elastic: Vec<usize> = (0..pairs.len())
        .filter(|&i| pairs.values[i] > RIGID_MODE_RATIO * top)
        .collect();
    if elastic.len() < n_modes {
        return Err(Error::validation(format!(
            "requested {n_modes} modes but only {} elastic modes exist",
            elastic.len()
        )));
    }
    let mut frequencies = Vec::with_capacity(n_modes);
    let mut shapes = Vec::with_capacity(n_modes);
    for &i in &elastic[..n_modes] {
        frequencies.push(pairs.values[i].sqrt());
        shapes.push(unit_shape(pairs.vectors[i].clone()));
    }
    Ok(ModalProperties { frequencies, shapes })
}

/// Boundary-condition change modeled as a random mass redistribution:
/// every diagonal mass is scaled by `1 + u`, `u ~ U[-magnitude, magnitude]`.
pub fn perturb_boundary(m: &SymMatrix, rng: &mut Rng, magnitude: f64) -> Result<SymMatrix> {
    if !(0.0..=0.1).contains(&magnitude) {
        return Err(Error::validation(format!(
            "boundary perturbation must be in [0, 0.1], got {magnitude}"
        )));
    }
    if !m.is_diagonal() {
        return Err(Error::validation("boundary perturbation expects a lumped (diagonal) mass matrix"));
    }
    if magnitude == 0.0 {
        return Ok(m.clone());
    }
    let diag: Vec<f64> = m
        .diagonal()
        .into_iter()
        .map(|d| d * (1.0 + rng.uniform_in(-magnitude, magnitude)))
        .collect();
    Ok(SymMatrix::from_diagonal(&diag))
}

/// Measurement noise: relative Gaussian noise on frequencies, absolute
/// Gaussian noise on shape coordinates. Modes are re-sorted by frequency
/// and shapes re-normalized.
pub fn add_measurement_noise(
    modal: &ModalProperties,
    rng: &mut Rng,
    freq_noise: f64,
    shape_noise: f64,
) -> Result<ModalProperties> {
    if !(freq_noise >= 0.0) || !(shape_noise >= 0.0) {
        return Err(Error::validation("noise levels must be non-negative"));
    }
    if freq_noise == 0.0 && shape_noise == 0.0 {
        return Ok(modal.clone());
    }
    let mut modes: Vec<(f64, Vec<f64>)> = modal
        .frequencies
        .iter()
        .zip(&modal.shapes)
        .map(|(&w, shape)| {
            let w = (w * (1.0 + freq_noise * rng.normal())).max(0.0);
            let noisy: Vec<f64> = shape.iter().map(|&c| c + shape_noise * rng.normal()).collect();
            (w, unit_shape(noisy))
        })
        .collect();
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (frequencies, shapes) = modes.into_iter().unzip();
    Ok(ModalProperties { frequencies, shapes })
}

fn unit_shape(mut v: Vec<f64>) -> Vec<f64> {
    let len = norm(&v);
    if len > 0.0 {
        v.iter_mut().for_each(|x| *x /= len);
    }
    sign_normalize(&mut v);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> CylinderConfig {
        CylinderConfig {
            n_dof: n,
            base_mass: 1.0,
            base_stiffness: 1.0,
            ring_topology: true,
            ..CylinderConfig::default()
        }
    }

    fn label(s: &str) -> FaultLabel {
        s.parse().unwrap()
    }

    #[test]
    fn healthy_matches_pristine() {
        let spec = Specimen::nominal(&CylinderConfig::default()).unwrap();
        let (m0, k0) = build_system(&spec, &FaultScenario::healthy()).unwrap();
        let (m1, k1) = build_system(&spec, &FaultScenario::new(label("000"), 0.4)).unwrap();
        assert_eq!(k0, k1);
        assert_eq!(m0, m1);
        assert!(m0.is_diagonal());
    }

    #[test]
    fn all_faulted_scales_uniformly() {
        let spec = Specimen::nominal(&ring(9)).unwrap();
        let (_, k0) = build_system(&spec, &FaultScenario::healthy()).unwrap();
        let (_, k1) = build_system(&spec, &FaultScenario::new(label("111"), 0.25)).unwrap();
        for (a, b) in k0.as_slice().iter().zip(k1.as_slice()) {
            assert_eq!(0.75 * a, *b);
        }
    }

    #[test]
    fn six_dof_single_fault_springs() {
        let cfg = ring(6);
        let spec = Specimen::nominal(&cfg).unwrap();
        let (_, k) = build_system(&spec, &FaultScenario::new(label("100"), 0.3)).unwrap();
        // Oracle: assemble element by element from the spring list.
        let springs = [0.7, 0.7, 1.0, 1.0, 1.0, 1.0];
        let mut oracle = vec![vec![0.0; 6]; 6];
        for (j, &s) in springs.iter().enumerate() {
            let (a, b) = (j, (j + 1) % 6);
            oracle[a][a] += s;
            oracle[b][b] += s;
            oracle[a][b] -= s;
            oracle[b][a] -= s;
        }
        for i in 0..6 {
            for j in 0..6 {
                assert!((k.get(i, j) - oracle[i][j]).abs() < 1e-15, "({i},{j})");
            }
        }
        assert_eq!(cfg.substructure_map(), vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn nineteen_springs_split_into_three_arcs() {
        let map = CylinderConfig::default().substructure_map();
        let counts: Vec<usize> = (0..3).map(|s| map.iter().filter(|&&x| x == s).count()).collect();
        assert_eq!(counts, vec![7, 6, 6]);
        assert!(map.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn severity_out_of_range() {
        let spec = Specimen::nominal(&ring(6)).unwrap();
        assert!(build_system(&spec, &FaultScenario::new(label("100"), 1.0)).is_err());
        assert!(build_system(&spec, &FaultScenario::new(label("100"), -0.1)).is_err());
    }

    #[test]
    fn two_dof_chain_frequencies() {
        let k = SymMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let modal = solve_modes(&SymMatrix::identity(2), &k, 2).unwrap();
        let s5 = 5.0_f64.sqrt();
        assert!((modal.frequencies[0] - ((3.0 - s5) / 2.0).sqrt()).abs() < 1e-10);
        assert!((modal.frequencies[1] - ((3.0 + s5) / 2.0).sqrt()).abs() < 1e-10);
        assert!((modal.frequencies[0] - 0.6180339887).abs() < 1e-9);
        assert!((modal.frequencies[1] - 1.6180339887).abs() < 1e-9);
    }

    #[test]
    fn ring_drops_rigid_mode_and_has_unit_shapes() {
        let spec = Specimen::nominal(&CylinderConfig::default()).unwrap();
        let (m, k) = build_system(&spec, &FaultScenario::healthy()).unwrap();
        let modal = solve_modes(&m, &k, 17).unwrap();
        assert_eq!(modal.n_modes(), 17);
        assert_eq!(modal.n_coords(), 19);
        assert!(modal.frequencies[0] > 1.0);
        assert!(modal.frequencies.windows(2).all(|w| w[0] <= w[1]));
        for s in &modal.shapes {
            assert!((norm(s) - 1.0).abs() < 1e-12);
        }
        // 18 elastic modes exist on a 19-node ring.
        assert!(solve_modes(&m, &k, 18).is_ok());
        assert!(solve_modes(&m, &k, 19).is_err());
    }

    #[test]
    fn stiffness_scaling_doubles_frequencies() {
        let mut rng = Rng::new(2);
        let spec = Specimen::sample(&ring(12), 0.01, &mut rng).unwrap();
        let fault = FaultScenario::new(label("010"), 0.2);
        let (m, k) = build_system(&spec, &fault).unwrap();
        let a = solve_modes(&m, &k, 8).unwrap();
        let b = solve_modes(&m, &k.scaled(4.0), 8).unwrap();
        for (x, y) in a.frequencies.iter().zip(&b.frequencies) {
            assert!((2.0 * x - y).abs() < 1e-10 * y);
        }
        for (x, y) in a.shapes.iter().zip(&b.shapes) {
            for (p, q) in x.iter().zip(y) {
                assert!((p - q).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn severity_never_raises_frequencies() {
        let mut rng = Rng::new(9);
        let spec = Specimen::sample(&ring(12), 0.01, &mut rng).unwrap();
        for l in FaultLabel::TABLE_ORDER {
            let mut prev: Option<Vec<f64>> = None;
            for step in 0..=10 {
                let s = 0.05 * step as f64;
                let (m, k) = build_system(&spec, &FaultScenario::new(l, s)).unwrap();
                let f = solve_modes(&m, &k, 11).unwrap().frequencies;
                if let Some(p) = &prev {
                    for (a, b) in f.iter().zip(p) {
                        assert!(*a <= b * (1.0 + 1e-12), "{l} severity {s}");
                    }
                }
                prev = Some(f);
            }
        }
    }

    #[test]
    fn rotation_permutes_substructures() {
        let mut rng = Rng::new(4);
        let spec = Specimen::sample(&ring(12), 0.02, &mut rng).unwrap();
        // Arc 0 of `spec` sits under arc 1 once rotated by a third of the ring.
        let rotated = spec.rotated(4);
        let a = {
            let (m, k) = build_system(&spec, &FaultScenario::new(label("100"), 0.3)).unwrap();
            solve_modes(&m, &k, 11).unwrap()
        };
        let b = {
            let (m, k) = build_system(&rotated, &FaultScenario::new(label("010"), 0.3)).unwrap();
            solve_modes(&m, &k, 11).unwrap()
        };
        for (x, y) in a.frequencies.iter().zip(&b.frequencies) {
            assert!((x - y).abs() < 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn boundary_perturbation_bounds() {
        let m = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let mut rng = Rng::new(0);
        assert_eq!(perturb_boundary(&m, &mut rng, 0.0).unwrap(), m);
        let a = perturb_boundary(&m, &mut Rng::new(5), 0.02).unwrap();
        let b = perturb_boundary(&m, &mut Rng::new(5), 0.02).unwrap();
        assert_eq!(a, b);
        for _ in 0..1000 {
            let p = perturb_boundary(&m, &mut rng, 0.02).unwrap();
            for (orig, new) in m.diagonal().iter().zip(p.diagonal()) {
                assert!((new / orig - 1.0).abs() <= 0.02 + 1e-15);
            }
        }
        assert!(perturb_boundary(&m, &mut rng, 0.2).is_err());
    }

    #[test]
    fn measurement_noise_statistics() {
        let modal = ModalProperties {
            frequencies: vec![100.0],
            shapes: vec![vec![0.6, 0.8]],
        };
        let mut rng = Rng::new(0);
        assert_eq!(add_measurement_noise(&modal, &mut rng, 0.0, 0.0).unwrap(), modal);
        let rel: Vec<f64> = (0..10_000)
            .map(|_| add_measurement_noise(&modal, &mut rng, 0.01, 0.0).unwrap().frequencies[0] / 100.0 - 1.0)
            .collect();
        let mean = rel.iter().sum::<f64>() / rel.len() as f64;
        let sd = (rel.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (rel.len() - 1) as f64).sqrt();
        assert!((sd - 0.01).abs() < 0.001, "sd = {sd}");
        let noisy = add_measurement_noise(&modal, &mut rng, 0.01, 0.05).unwrap();
        assert!((norm(&noisy.shapes[0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seam_splits_every_mode_pair() {
        let (m, k) = build_system(&Specimen::nominal(&ring(12)).unwrap(), &FaultScenario::healthy()).unwrap();
        let homogeneous = solve_modes(&m, &k, 11).unwrap().frequencies;
        assert!((homogeneous[1] - homogeneous[0]).abs() < 1e-6 * homogeneous[0]);

        let seamed = CylinderConfig {
            seam_stiffness: 1.5,
            ..ring(12)
        };
        let s = Specimen::nominal(&seamed).unwrap();
        assert_eq!(s.stiffnesses[11], 1.5);
        assert!(s.stiffnesses[..11].iter().all(|&k| k == 1.0));
        let (m, k) = build_system(&s, &FaultScenario::healthy()).unwrap();
        let w = solve_modes(&m, &k, 11).unwrap().frequencies;
        assert!(w.windows(2).all(|p| p[1] - p[0] > 1e-4 * p[1]));
        assert!(Specimen::nominal(&CylinderConfig { seam_stiffness: 0.0, ..ring(12) }).is_err());
    }

    #[test]
    fn align_signs_follows_reference() {
        let reference = ModalProperties {
            frequencies: vec![1.0, 2.0],
            shapes: vec![vec![0.6, -0.8], vec![0.8, 0.6]],
        };
        let mut measured = ModalProperties {
            frequencies: vec![1.0, 2.0],
            shapes: vec![vec![-0.6, 0.8], vec![0.8, 0.6]],
        };
        measured.align_signs(&reference).unwrap();
        assert_eq!(measured.shapes, reference.shapes);
        let short = ModalProperties {
            frequencies: vec![1.0],
            shapes: vec![vec![1.0, 0.0]],
        };
        assert!(measured.align_signs(&short).is_err());
    }
}

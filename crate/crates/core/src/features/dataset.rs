//! Synthetic population datasets and their CSV form.
//!
//! CSV layout (version 1):
//!
//! ```text
//! # cylfault dataset format_version=1
//! s1,s2,s3,split,f0,f1,...,f339
//! 0,0,0,train,1234.5,...
//! ```
//!
//! `s1..s3` are the fault bits, `split` is `train` or `test`, and `f*` the
//! raw features in [`assemble_features`](super::assemble_features) order.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{assemble_features, FaultLabel};
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::structural::{
    add_measurement_noise, build_system, perturb_boundary, solve_modes, CylinderConfig,
    FaultScenario, Specimen,
};

pub const DATASET_FORMAT_VERSION: u32 = 1;
const DATASET_MAGIC: &str = "# cylfault dataset format_version=";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Relative standard deviation of natural-frequency noise.
    pub frequency: f64,
    /// Absolute standard deviation of mode-shape coordinate noise.
    pub shape: f64,
}

impl NoiseConfig {
    pub fn uniform(level: f64) -> Self {
        NoiseConfig {
            frequency: level,
            shape: level,
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig::uniform(0.0)
    }
}

/// Cases per fault class, indexed in [`FaultLabel::TABLE_ORDER`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassCounts {
    pub total: [usize; 8],
    pub train_per_class: usize,
}

impl Default for ClassCounts {
    fn default() -> Self {
        ClassCounts {
            total: [60, 24, 24, 24, 24, 24, 24, 60],
            train_per_class: 21,
        }
    }
}

impl ClassCounts {
    pub fn test_counts(&self) -> [usize; 8] {
        self.total.map(|t| t.saturating_sub(self.train_per_class))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub cylinder: CylinderConfig,
    pub n_modes: usize,
    /// Number of distinct cylinders.
    pub population: usize,
    /// Boundary conditions measured per cylinder.
    pub boundary_conditions: usize,
    /// Manufacturing spread of element values (uniform, relative).
    pub population_variability: f64,
    /// Mass perturbation magnitude of one boundary condition.
    pub boundary_perturbation: f64,
    /// Stiffness-loss levels used for faulted cases.
    pub severities: Vec<f64>,
    pub noise: NoiseConfig,
    /// Orient every measured shape like the matching mode of the nominal
    /// healthy cylinder. Without this the largest-component sign rule lets
    /// wave-like shapes flip sign between specimens.
    pub align_shapes: bool,
    pub counts: ClassCounts,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            cylinder: CylinderConfig {
                seam_stiffness: 1.5,
                ..CylinderConfig::default()
            },
            n_modes: 17,
            population: 20,
            boundary_conditions: 3,
            population_variability: 0.01,
            boundary_perturbation: 0.01,
            severities: vec![0.1, 0.2, 0.3],
            noise: NoiseConfig::default(),
            align_shapes: true,
            counts: ClassCounts::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.cylinder.validate()?;
        if self.population == 0 || self.boundary_conditions == 0 {
            return Err(Error::validation("population and boundary conditions must be nonzero"));
        }
        if self.severities.is_empty() {
            return Err(Error::validation("at least one fault severity is required"));
        }
        if let Some(s) = self.severities.iter().find(|s| !(0.05..=0.5).contains(*s)) {
            return Err(Error::validation(format!("severity {s} outside [0.05, 0.5]")));
        }
        for (label, &total) in FaultLabel::TABLE_ORDER.iter().zip(&self.counts.total) {
            let levels = if label.fault_count() == 0 { 1 } else { self.severities.len() };
            let capacity = self.population * self.boundary_conditions * levels;
            if total > capacity {
                return Err(Error::validation(format!(
                    "class {label} needs {total} cases but the population supports {capacity}"
                )));
            }
            if total <= self.counts.train_per_class {
                return Err(Error::validation(format!(
                    "class {label} has {total} cases, not enough for {} training cases plus a test case",
                    self.counts.train_per_class
                )));
            }
        }
        Ok(())
    }
}

/// Raw feature rows with labels and split assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<FaultLabel>,
    pub split: Vec<Split>,
}

/// One measured case: which cylinder, which boundary condition, which fault level.
#[derive(Debug, Clone, Copy)]
struct Case {
    cylinder: usize,
    boundary: usize,
    severity: f64,
}

/// Distinct (cylinder, severity, boundary) combinations for one class, in a
/// fixed interleaved order so that small classes still span several
/// cylinders, severities and boundary conditions.
fn case_plan(config: &SimulationConfig, label: FaultLabel, count: usize) -> Vec<Case> {
    let levels: Vec<f64> = if label.fault_count() == 0 {
        vec![0.0]
    } else {
        config.severities.clone()
    };
    let pop = config.population;
    let n_bc = config.boundary_conditions;
    let offset = (label.class_index() * 7) % pop;
    let mut plan = Vec::with_capacity(count);
    'outer: for shift in 0..n_bc {
        for r in 0..pop {
            for (s, &severity) in levels.iter().enumerate() {
                if plan.len() == count {
                    break 'outer;
                }
                plan.push(Case {
                    cylinder: (offset + r) % pop,
                    boundary: (r + s + shift) % n_bc,
                    severity,
                });
            }
        }
    }
    plan
}

/// Generates the population dataset for `seed`.
///
/// Each cylinder draws its element values once; each boundary condition of
/// a cylinder is a fixed mass perturbation shared by every fault case
/// measured under it; measurement noise is drawn per case. Within each
/// class, `train_per_class` cases are drawn at random for training.
pub fn generate_dataset(config: &SimulationConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let root = Rng::new(seed);
    let cylinder_streams = root.split(0);
    let boundary_streams = root.split(1);
    let noise_streams = root.split(2);
    let mut split_rng = root.split(3);

    let specimens = (0..config.population)
        .map(|c| {
            let mut rng = cylinder_streams.split(c as u64);
            Specimen::sample(&config.cylinder, config.population_variability, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = if config.align_shapes {
        let (m, k) = build_system(&Specimen::nominal(&config.cylinder)?, &FaultScenario::healthy())?;
        Some(solve_modes(&m, &k, config.n_modes)?)
    } else {
        None
    };

    let mut dataset = Dataset {
        features: Vec::new(),
        labels: Vec::new(),
        split: Vec::new(),
    };
    for (label, &count) in FaultLabel::TABLE_ORDER.iter().zip(&config.counts.total) {
        let mut order: Vec<usize> = (0..count).collect();
        split_rng.shuffle(&mut order);
        let mut is_train = vec![false; count];
        for &i in &order[..config.counts.train_per_class] {
            is_train[i] = true;
        }

        for (i, case) in case_plan(config, *label, count).into_iter().enumerate() {
            let fault = FaultScenario::new(*label, case.severity);
            let (m, k) = build_system(&specimens[case.cylinder], &fault)?;
            let bc_index = (case.cylinder * config.boundary_conditions + case.boundary) as u64;
            let mut bc_rng = boundary_streams.split(bc_index);
            let m = perturb_boundary(&m, &mut bc_rng, config.boundary_perturbation)?;
            let modal = solve_modes(&m, &k, config.n_modes)?;
            let mut noise_rng = noise_streams.split(dataset.features.len() as u64);
            let mut measured = add_measurement_noise(
                &modal,
                &mut noise_rng,
                config.noise.frequency,
                config.noise.shape,
            )?;
            if let Some(r) = &reference {
                measured.align_signs(r)?;
            }
            dataset.features.push(assemble_features(&measured)?);
            dataset.labels.push(*label);
            dataset
                .split
                .push(if is_train[i] { Split::Train } else { Split::Test });
        }
    }
    Ok(dataset)
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    fn part(&self, which: Split) -> (Vec<Vec<f64>>, Vec<FaultLabel>) {
        self.features
            .iter()
            .zip(&self.labels)
            .zip(&self.split)
            .filter(|(_, s)| **s == which)
            .map(|((x, l), _)| (x.clone(), *l))
            .unzip()
    }

    pub fn train(&self) -> (Vec<Vec<f64>>, Vec<FaultLabel>) {
        self.part(Split::Train)
    }

    pub fn test(&self) -> (Vec<Vec<f64>>, Vec<FaultLabel>) {
        self.part(Split::Test)
    }

    /// Per-class counts in [`FaultLabel::TABLE_ORDER`] for one split.
    pub fn class_histogram(&self, which: Split) -> [usize; 8] {
        let mut h = [0; 8];
        for (l, s) in self.labels.iter().zip(&self.split) {
            if *s == which {
                h[l.table_position()] += 1;
            }
        }
        h
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = format!("{DATASET_MAGIC}{DATASET_FORMAT_VERSION}\ns1,s2,s3,split");
        for j in 0..self.dim() {
            let _ = write!(out, ",f{j}");
        }
        out.push('\n');
        for ((x, l), s) in self.features.iter().zip(&self.labels).zip(&self.split) {
            let [a, b, c] = l.bits().map(u8::from);
            let _ = write!(out, "{a},{b},{c},{}", s.as_str());
            for v in x {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let version = first
            .trim_end()
            .strip_prefix(DATASET_MAGIC)
            .ok_or_else(|| Error::Format("missing dataset format header".into()))?;
        if version.parse::<u32>().ok() != Some(DATASET_FORMAT_VERSION) {
            return Err(Error::Format(format!("unsupported dataset format_version {version}")));
        }
        let mut reader = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.len() < 5 || headers.iter().take(4).ne(["s1", "s2", "s3", "split"]) {
            return Err(Error::Format("dataset header must start with s1,s2,s3,split".into()));
        }
        let dim = headers.len() - 4;
        let mut ds = Dataset {
            features: Vec::new(),
            labels: Vec::new(),
            split: Vec::new(),
        };
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Format(format!("dataset row {}: {what}", line + 1));
            let bit = |i: usize| match &rec[i] {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad("fault bits must be 0 or 1")),
            };
            ds.labels.push(FaultLabel::new(bit(0)?, bit(1)?, bit(2)?));
            ds.split.push(match &rec[3] {
                "train" => Split::Train,
                "test" => Split::Test,
                _ => return Err(bad("split must be train or test")),
            });
            let row = (4..4 + dim)
                .map(|i| rec[i].parse::<f64>().map_err(|_| bad("unparsable feature")))
                .collect::<Result<Vec<f64>>>()?;
            ds.features.push(row);
        }
        Ok(ds)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_plan_is_distinct() {
        let config = SimulationConfig::default();
        for (label, &count) in FaultLabel::TABLE_ORDER.iter().zip(&config.counts.total) {
            let plan = case_plan(&config, *label, count);
            assert_eq!(plan.len(), count);
            let mut keys: Vec<(usize, usize, u64)> = plan
                .iter()
                .map(|c| (c.cylinder, c.boundary, c.severity.to_bits()))
                .collect();
            keys.sort();
            keys.dedup();
            assert_eq!(keys.len(), count, "{label}");
        }
    }

    #[test]
    fn infeasible_counts_rejected() {
        let mut config = SimulationConfig::default();
        config.population = 5;
        assert!(matches!(generate_dataset(&config, 0), Err(Error::Validation(_))));
        let mut config = SimulationConfig::default();
        config.counts.train_per_class = 24;
        assert!(generate_dataset(&config, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = Dataset {
            features: vec![vec![1.5, -0.1, 1e-17], vec![2.0, 3.25, 0.3333333333333333]],
            labels: vec![FaultLabel::new(true, false, true), FaultLabel::HEALTHY],
            split: vec![Split::Train, Split::Test],
        };
        let text = ds.to_csv_string();
        assert!(text.starts_with("# cylfault dataset format_version=1\ns1,s2,s3,split,f0,f1,f2\n"));
        assert_eq!(Dataset::from_csv_str(&text).unwrap(), ds);
        assert!(Dataset::from_csv_str("s1,s2\n").is_err());
    }
}

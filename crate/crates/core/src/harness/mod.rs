//! Experiment orchestration: data generation, feature reduction, training
//! of the three classifiers and confusion-matrix reports.

mod config;
pub mod io;
mod report;

pub use config::{ExperimentConfig, MlpConfig, CONFIG_FORMAT_VERSION, DEFAULT_NOISE};
pub use report::{
    confusion_matrix, render_grid, render_report, write_report, ClassifierResult, ConfusionMatrix, ReportFormat,
    RunReport,
};

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageContext};
use crate::features::{generate_dataset, Dataset, FaultLabel, FeaturePipeline};
use crate::gmm::GmmClassifier;
use crate::mlp::{train_classifier, MlpModel};
use crate::numerics::Rng;
use crate::svm::MultiLabelSvm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Mlp,
    Svm,
    Gmm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Mlp, ClassifierKind::Svm, ClassifierKind::Gmm];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Gmm => "gmm",
        }
    }

    fn stream(self) -> u64 {
        match self {
            ClassifierKind::Mlp => 10,
            ClassifierKind::Svm => 11,
            ClassifierKind::Gmm => 12,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlp" => Ok(ClassifierKind::Mlp),
            "svm" => Ok(ClassifierKind::Svm),
            "gmm" => Ok(ClassifierKind::Gmm),
            other => Err(Error::validation(format!("unknown classifier `{other}` (expected mlp, svm or gmm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum Classifier {
    Mlp(MlpModel),
    Svm(MultiLabelSvm),
    Gmm(GmmClassifier),
}

impl Classifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::Mlp(_) => ClassifierKind::Mlp,
            Classifier::Svm(_) => ClassifierKind::Svm,
            Classifier::Gmm(_) => ClassifierKind::Gmm,
        }
    }

    /// Fits a classifier of `kind` on reduced features.
    pub fn fit(kind: ClassifierKind, config: &ExperimentConfig, x: &[Vec<f64>], labels: &[FaultLabel]) -> Result<Self> {
        let rng = Rng::new(config.seed).split(kind.stream());
        match kind {
            ClassifierKind::Mlp => {
                let (model, outcome) =
                    train_classifier(x, labels, config.mlp.hidden, &config.mlp.scg_options(), &mut rng.clone())?;
                log::debug!(
                    "mlp: {} accepted steps, final loss {:.6}, converged {}",
                    outcome.iterations,
                    outcome.final_loss(),
                    outcome.converged
                );
                Ok(Classifier::Mlp(model))
            }
            ClassifierKind::Svm => Ok(Classifier::Svm(MultiLabelSvm::train(x, labels, &config.svm)?)),
            ClassifierKind::Gmm => Ok(Classifier::Gmm(GmmClassifier::train(x, labels, &config.gmm, &rng)?)),
        }
    }

    pub fn predict(&self, z: &[f64]) -> Result<FaultLabel> {
        match self {
            Classifier::Mlp(m) => m.predict(z),
            Classifier::Svm(m) => m.predict_label(z),
            Classifier::Gmm(m) => m.classify_one(z),
        }
    }
}

/// Feature pipeline plus classifier: everything needed to label raw features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub pipeline: FeaturePipeline,
    pub classifier: Classifier,
}

impl TrainedModel {
    pub fn train(kind: ClassifierKind, config: &ExperimentConfig, dataset: &Dataset) -> Result<Self> {
        let (x, labels) = dataset.train();
        let pipeline = FeaturePipeline::fit(&x, config.pca_dim).stage("feature reduction")?;
        let z = pipeline.transform_all(&x)?;
        let classifier = Classifier::fit(kind, config, &z, &labels).stage(kind.name())?;
        Ok(TrainedModel { pipeline, classifier })
    }

    pub fn predict(&self, raw: &[f64]) -> Result<FaultLabel> {
        self.classifier.predict(&self.pipeline.transform(raw)?)
    }

    pub fn to_json(&self) -> Result<String> {
        io::to_versioned_json("model", self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        io::from_versioned_json("model", text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn evaluate_on(classifier: &Classifier, z: &[Vec<f64>], actual: &[FaultLabel]) -> Result<ConfusionMatrix> {
    let predicted = z.iter().map(|zi| classifier.predict(zi)).collect::<Result<Vec<_>>>()?;
    confusion_matrix(&predicted, actual)
}

/// Test-split confusion matrix of a trained model on `dataset`.
pub fn evaluate_model(model: &TrainedModel, dataset: &Dataset) -> Result<ConfusionMatrix> {
    let (x, actual) = dataset.test();
    if x.is_empty() {
        return Err(Error::validation("dataset has no test rows"));
    }
    let z = model.pipeline.transform_all(&x)?;
    evaluate_on(&model.classifier, &z, &actual)
}

/// Runs the full experiment described by `config`.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let dataset = generate_dataset(&config.simulation, config.seed).stage("data generation")?;
    benchmark_dataset(config, &dataset)
}

/// Trains and evaluates all three classifiers on one shared feature reduction.
pub fn benchmark_dataset(config: &ExperimentConfig, dataset: &Dataset) -> Result<RunReport> {
    let (x_train, y_train) = dataset.train();
    let (x_test, y_test) = dataset.test();
    let pipeline = FeaturePipeline::fit(&x_train, config.pca_dim).stage("feature reduction")?;
    let z_train = pipeline.transform_all(&x_train).stage("feature reduction")?;
    let z_test = pipeline.transform_all(&x_test).stage("feature reduction")?;

    let outcomes: Vec<Result<ClassifierResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ClassifierKind::ALL
            .iter()
            .map(|&kind| {
                let (z_train, y_train, z_test, y_test) = (&z_train, &y_train, &z_test, &y_test);
                scope.spawn(move || {
                    let start = Instant::now();
                    let classifier = Classifier::fit(kind, config, z_train, y_train).stage(kind.name())?;
                    let matrix = evaluate_on(&classifier, z_test, y_test).stage(kind.name())?;
                    Ok(ClassifierResult::new(kind.name(), matrix, start.elapsed().as_secs_f64()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("classifier thread panicked"))
            .collect()
    });
    let results = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    RunReport::new(config.clone(), results)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPoint {
    pub noise: f64,
    /// Accuracies in [`ClassifierKind::ALL`] order.
    pub accuracies: [f64; 3],
}

impl CalibrationPoint {
    pub fn best(&self) -> f64 {
        self.accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs the benchmark at each grid level (ascending) and returns the
/// smallest level whose best accuracy is below `threshold`, along with
/// every point evaluated up to it.
pub fn calibrate_noise(
    base: &ExperimentConfig,
    grid: &[f64],
    threshold: f64,
) -> Result<(Option<f64>, Vec<CalibrationPoint>)> {
    let mut points = Vec::new();
    for &level in grid {
        let report = run_benchmark(&base.clone().with_noise(level))?;
        let mut accuracies = [0.0; 3];
        for (a, kind) in accuracies.iter_mut().zip(ClassifierKind::ALL) {
            *a = report.accuracy(kind.name()).expect("benchmark reports every classifier");
        }
        let point = CalibrationPoint { noise: level, accuracies };
        let done = point.best() < threshold;
        points.push(point);
        if done {
            return Ok((Some(level), points));
        }
    }
    Ok((None, points))
}

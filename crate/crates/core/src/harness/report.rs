use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::features::FaultLabel;

/// Counts indexed `[actual][predicted]` in table order
/// `[000],[100],[010],[001],[110],[101],[011],[111]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: [[usize; 8]; 8],
}

pub fn confusion_matrix(predicted: &[FaultLabel], actual: &[FaultLabel]) -> Result<ConfusionMatrix> {
    if predicted.len() != actual.len() {
        return Err(Error::validation(format!(
            "{} predictions for {} actual labels",
            predicted.len(),
            actual.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::validation("confusion matrix needs at least one sample"));
    }
    let mut counts = [[0; 8]; 8];
    for (p, a) in predicted.iter().zip(actual) {
        counts[a.table_position()][p.table_position()] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[usize; 8]; 8]) -> Result<Self> {
        if counts.iter().flatten().sum::<usize>() == 0 {
            return Err(Error::validation("confusion matrix is empty"));
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn counts(&self) -> &[[usize; 8]; 8] {
        &self.counts
    }

    pub fn get(&self, actual: FaultLabel, predicted: FaultLabel) -> usize {
        self.counts[actual.table_position()][predicted.table_position()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..8).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> [usize; 8] {
        self.counts.map(|r| r.iter().sum())
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub name: String,
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    /// Training plus evaluation time. Not part of the rendered report.
    pub wall_time_secs: f64,
}

impl ClassifierResult {
    pub fn new(name: impl Into<String>, matrix: ConfusionMatrix, wall_time_secs: f64) -> Self {
        ClassifierResult {
            name: name.into(),
            accuracy: matrix.accuracy(),
            matrix,
            wall_time_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub results: Vec<ClassifierResult>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, results: Vec<ClassifierResult>) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::validation("report needs at least one classifier result"));
        }
        Ok(RunReport {
            seed: config.seed,
            config,
            results,
        })
    }

    pub fn accuracy(&self, name: &str) -> Option<f64> {
        self.results.iter().find(|r| r.name == name).map(|r| r.accuracy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Text => "txt",
            ReportFormat::Csv => "csv",
        }
    }
}

/// The grid alone: actual classes down, predicted across.
pub fn render_grid(m: &ConfusionMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8}{:>6}", "", "Predicted");
    let _ = write!(out, "{:<8}", "Actual");
    for l in FaultLabel::TABLE_ORDER {
        let _ = write!(out, "{:>6}", l.to_string());
    }
    out.push('\n');
    for (a, row) in FaultLabel::TABLE_ORDER.iter().zip(m.counts()) {
        let _ = write!(out, "{:<8}", a.to_string());
        for c in row {
            let _ = write!(out, "{c:>6}");
        }
        out.push('\n');
    }
    out
}

pub fn render_report(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Csv => render_csv(report),
    }
}

fn render_text(report: &RunReport) -> String {
    let noise = report.config.simulation.noise;
    let mut out = String::new();
    let _ = writeln!(out, "cylfault report format_version=1");
    let _ = writeln!(
        out,
        "seed {}  noise frequency={} shape={}  pca_dim {}",
        report.seed, noise.frequency, noise.shape, report.config.pca_dim
    );
    for r in &report.results {
        let _ = writeln!(
            out,
            "\n{}: accuracy {:.4} ({}/{})\n",
            r.name,
            r.accuracy,
            r.matrix.trace(),
            r.matrix.total()
        );
        out.push_str(&render_grid(&r.matrix));
    }
    let _ = writeln!(out, "\nsummary");
    for r in &report.results {
        let _ = writeln!(out, "{:<6}{:.4}", r.name, r.accuracy);
    }
    out
}

fn render_csv(report: &RunReport) -> String {
    let mut out = String::from("# cylfault report format_version=1\nclassifier,actual,predicted,count\n");
    for r in &report.results {
        for (a, row) in FaultLabel::TABLE_ORDER.iter().zip(r.matrix.counts()) {
            for (p, c) in FaultLabel::TABLE_ORDER.iter().zip(row) {
                let _ = writeln!(out, "{},{a},{p},{c}", r.name);
            }
        }
    }
    out
}

/// Writes `report.txt`, `report.csv` and the config echo `config.json` into `dir`.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for format in [ReportFormat::Text, ReportFormat::Csv] {
        let path = dir.join(format!("report.{}", format.extension()));
        std::fs::write(&path, render_report(report, format)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("config.json");
    std::fs::write(&path, report.config.to_json()?).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

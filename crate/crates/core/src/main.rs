use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cylfault::features::{generate_dataset, Dataset};
use cylfault::harness::{
    calibrate_noise, evaluate_model, run_benchmark, write_report, ClassifierKind, ClassifierResult,
    ExperimentConfig, RunReport, TrainedModel,
};
use cylfault::{Error, Result};

#[derive(Parser)]
#[command(name = "cylfault", version, about = "Fault classification of simulated cylinder populations")]
struct Cli {
    /// Experiment config (JSON). Defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Measurement noise for both frequencies and mode shapes.
    #[arg(long, global = true)]
    noise: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the population and write dataset.csv.
    Generate,
    /// Train one classifier on a dataset CSV and write <kind>.model.json.
    Train {
        #[arg(value_parser = parse_kind)]
        kind: ClassifierKind,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Evaluate a model file on the test split of a dataset CSV.
    Evaluate {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Generate, train all three classifiers and write the report.
    Benchmark,
    /// Find the smallest noise level where the best classifier drops below 99%.
    Calibrate {
        #[arg(long, value_delimiter = ',', default_value = "0,0.001,0.002,0.003,0.004,0.005,0.006,0.007,0.008,0.009,0.01")]
        grid: Vec<f64>,
    },
}

fn parse_kind(s: &str) -> std::result::Result<ClassifierKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(level) = cli.noise {
        config = config.with_noise(level);
    }
    config.validate()?;
    Ok(config)
}

fn required<'a>(value: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::Validation(format!("missing input: {what} is required")))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn run(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    let out = &config.output_dir;
    match &cli.command {
        Command::Generate => {
            let dataset = generate_dataset(&config.simulation, config.seed)?;
            create_dir(out)?;
            let path = out.join("dataset.csv");
            dataset.write_csv(&path)?;
            println!("wrote {} ({} samples)", path.display(), dataset.len());
        }
        Command::Train { kind, dataset } => {
            let dataset = Dataset::read_csv(required(dataset, "--dataset <csv>")?)?;
            let model = TrainedModel::train(*kind, &config, &dataset)?;
            create_dir(out)?;
            let path = out.join(format!("{kind}.model.json"));
            model.save(&path)?;
            println!("wrote {}", path.display());
        }
        Command::Evaluate { model, dataset } => {
            let model = TrainedModel::load(required(model, "--model <file>")?)?;
            let dataset = Dataset::read_csv(required(dataset, "--dataset <csv>")?)?;
            let matrix = evaluate_model(&model, &dataset)?;
            let kind = model.classifier.kind();
            let report = RunReport::new(config.clone(), vec![ClassifierResult::new(kind.name(), matrix, 0.0)])?;
            for path in write_report(&report, out)? {
                println!("wrote {}", path.display());
            }
            println!("{kind} accuracy {:.4}", report.results[0].accuracy);
        }
        Command::Benchmark => {
            let report = run_benchmark(&config)?;
            for path in write_report(&report, out)? {
                println!("wrote {}", path.display());
            }
            for r in &report.results {
                println!("{:<4} accuracy {:.4}  ({:.2} s)", r.name, r.accuracy, r.wall_time_secs);
            }
        }
        Command::Calibrate { grid } => {
            let mut grid = grid.clone();
            grid.sort_by(f64::total_cmp);
            let (level, points) = calibrate_noise(&config, &grid, 0.99)?;
            for p in &points {
                println!(
                    "noise {:<8} mlp {:.4} svm {:.4} gmm {:.4}",
                    p.noise, p.accuracies[0], p.accuracies[1], p.accuracies[2]
                );
            }
            match level {
                Some(l) => println!("calibrated noise {l}"),
                None => println!("no grid level drops the best classifier below 0.99"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

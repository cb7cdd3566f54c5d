use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::classifier::TrainConfig;
use crate::dataset::{DatasetId, SplitPolicy, Task};
use crate::ensemble::Strategy;
use crate::error::{Error, Result};
use crate::imaging::PreprocessConfig;

#[derive(Debug, Parser)]
#[command(name = "rgp", version, about = "Diabetic retinopathy grading pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Crop, equalize, normalize and resize every manifest image
    Preprocess,
    /// Assign train/validate/test splits and print class distributions
    Split,
    /// Train the softmax baseline on the train split
    TrainBaseline,
    /// Fuse model predictions on the test split and compute metrics
    Evaluate,
}

/// Flags override values from `--config`.
#[derive(Debug, Args, Default, Clone)]
pub struct GlobalArgs {
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_task)]
    pub task: Option<Task>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    #[arg(long, global = true)]
    pub target_specificity: Option<f64>,
    /// Concurrent images during preprocessing
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    pub images_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub exclusion_list: Option<PathBuf>,
    #[arg(long, global = true)]
    pub predictions_dir: Option<PathBuf>,
    /// Also write <id>.stage<k>.png after each preprocessing stage
    #[arg(long, global = true)]
    pub debug_stages: bool,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn default_target() -> Option<f64> {
    Some(0.9)
}

fn default_coverage() -> f64 {
    0.95
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Everything a run needs. Relative paths resolve against the working
/// directory; unset intermediate paths default to locations under `out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub images_dir: Option<PathBuf>,
    pub exclusion_list: Option<PathBuf>,
    /// Defaults to `<out>/predictions`.
    pub predictions_dir: Option<PathBuf>,
    /// Defaults to `<out>/processed`.
    pub processed_dir: Option<PathBuf>,
    /// Defaults to `<out>/splits.csv`.
    pub splits: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub task: Task,
    /// Required when the manifest mixes datasets.
    pub dataset: Option<DatasetId>,
    pub seed: u64,
    /// Defaults to the dataset's standard policy.
    pub split_policy: Option<SplitPolicy>,
    pub preprocess: PreprocessConfig,
    pub strategy: Strategy,
    pub baseline: TrainConfig,
    #[serde(default = "default_target")]
    pub target_specificity: Option<f64>,
    /// 0 uses every available core.
    pub workers: usize,
    /// Minimum fraction of test images that must have predictions.
    #[serde(default = "default_coverage")]
    pub coverage_threshold: f64,
    pub debug_stages: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            images_dir: None,
            exclusion_list: None,
            predictions_dir: None,
            processed_dir: None,
            splits: None,
            out: default_out(),
            task: Task::BinaryNormalAbnormal,
            dataset: None,
            seed: 0,
            split_policy: None,
            preprocess: PreprocessConfig::default(),
            strategy: Strategy::MeanProb,
            baseline: TrainConfig::default(),
            target_specificity: default_target(),
            workers: 0,
            coverage_threshold: default_coverage(),
            debug_stages: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) with flag overrides applied, then validated.
    pub fn resolve(args: &GlobalArgs) -> Result<Self> {
        let mut c = match &args.config {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(v) = args.task {
            c.task = v;
        }
        if let Some(v) = args.seed {
            c.seed = v;
        }
        if let Some(v) = args.strategy {
            c.strategy = v;
        }
        if let Some(v) = args.target_specificity {
            c.target_specificity = Some(v);
        }
        if let Some(v) = args.workers {
            c.workers = v;
        }
        if let Some(v) = &args.out {
            c.out = v.clone();
        }
        if let Some(v) = &args.manifest {
            c.manifest = Some(v.clone());
        }
        if let Some(v) = &args.images_dir {
            c.images_dir = Some(v.clone());
        }
        if let Some(v) = &args.exclusion_list {
            c.exclusion_list = Some(v.clone());
        }
        if let Some(v) = &args.predictions_dir {
            c.predictions_dir = Some(v.clone());
        }
        c.debug_stages |= args.debug_stages;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        if let Some(t) = self.target_specificity {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!(
                    "target specificity {t} outside [0, 1]"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.coverage_threshold) {
            return Err(Error::invalid("coverage_threshold must lie in [0, 1]"));
        }
        let b = &self.baseline;
        if b.learning_rate.is_nan()
            || b.learning_rate <= 0.0
            || b.l2.is_nan()
            || b.l2 < 0.0
            || b.thumbnail_side == 0
        {
            return Err(Error::invalid(
                "baseline needs learning_rate > 0, l2 >= 0, thumbnail_side >= 1",
            ));
        }
        for (name, path) in [
            ("manifest", &self.manifest),
            ("images_dir", &self.images_dir),
            ("exclusion_list", &self.exclusion_list),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(Error::invalid(format!(
                        "{name} {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn manifest_path(&self) -> Result<&Path> {
        self.manifest
            .as_deref()
            .ok_or_else(|| Error::invalid("no manifest configured (--manifest or \"manifest\")"))
    }

    pub fn processed_dir(&self) -> PathBuf {
        self.processed_dir
            .clone()
            .unwrap_or_else(|| self.out.join("processed"))
    }

    pub fn predictions_dir(&self) -> PathBuf {
        self.predictions_dir
            .clone()
            .unwrap_or_else(|| self.out.join("predictions"))
    }

    pub fn splits_path(&self) -> PathBuf {
        self.splits
            .clone()
            .unwrap_or_else(|| self.out.join("splits.csv"))
    }
}

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use super::RunConfig;
use crate::classifier::{
    featurize, load_predictions, train_softmax_with, write_predictions, FeatureVector,
    PredictionRecord,
};
use crate::dataset::{
    class_distribution, load_exclusions, load_manifest, load_splits, make_splits, map_grade, prune,
    write_splits, DatasetId, IdentityCheck, ManifestEntry, Split, SplitAssignment, SplitPolicy,
    Task,
};
use crate::ensemble::{fuse_batch, write_diagnoses, EnsembleInput};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic_str;
use crate::imaging::io::{load_rgb, save_png};
use crate::imaging::preprocess_traced;
use crate::metrics::{evaluate, roc_curve, roc_svg};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    /// Items that failed individually (the run continued past them).
    pub failures: usize,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            1
        } else {
            0
        }
    }
}

const IMAGE_EXTENSIONS: [&str; 6] = ["png", "jpg", "jpeg", "PNG", "JPG", "JPEG"];

fn find_image(dir: &Path, id: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS
        .iter()
        .map(|ext| dir.join(format!("{id}.{ext}")))
        .find(|p| p.is_file())
}

fn ensure_writable_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".rgp-write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

/// Manifest with the exclusion list applied, if one is configured.
fn pruned_manifest(config: &RunConfig) -> Result<Vec<ManifestEntry>> {
    let manifest = load_manifest(config.manifest_path()?)?;
    match &config.exclusion_list {
        None => Ok(manifest),
        Some(path) => {
            let report = prune(&manifest, &load_exclusions(path)?)?;
            info!(
                "pruned {} images ({} exclusion ids not in manifest)",
                report.removed,
                report.missing.len()
            );
            Ok(report.manifest)
        }
    }
}

fn dataset_of(config: &RunConfig, manifest: &[ManifestEntry]) -> Result<DatasetId> {
    if let Some(d) = config.dataset {
        return Ok(d);
    }
    let found: BTreeSet<DatasetId> = manifest.iter().map(|e| e.dataset).collect();
    match found.len() {
        1 => Ok(*found.iter().next().unwrap()),
        0 => Err(Error::invalid("manifest is empty")),
        _ => Err(Error::invalid(
            "manifest mixes datasets; set \"dataset\" in the config",
        )),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn cmd_preprocess(config: &RunConfig) -> Result<Outcome> {
    let manifest = pruned_manifest(config)?;
    let images_dir = config
        .images_dir
        .as_deref()
        .ok_or_else(|| Error::invalid("no images_dir configured"))?;
    let out_dir = config.processed_dir();
    ensure_writable_dir(&out_dir)?;
    ensure_writable_dir(&config.out)?;

    let mut entries: Vec<&ManifestEntry> = manifest.iter().collect();
    entries.sort_by(|a, b| a.image_id.cmp(&b.image_id));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    let results: Vec<(String, Result<String>)> = pool.install(|| {
        entries
            .par_iter()
            .map(|e| {
                (
                    e.image_id.clone(),
                    preprocess_one(config, images_dir, &out_dir, &e.image_id),
                )
            })
            .collect()
    });

    let mut log = String::from("image_id,status,detail\n");
    let mut errors = String::from("image_id,error\n");
    let mut outcome = Outcome::default();
    for (id, r) in &results {
        match r {
            Ok(stages) => writeln!(log, "{},ok,{stages}", csv_field(id)).unwrap(),
            Err(e) => {
                warn!("{id}: {e}");
                outcome.failures += 1;
                writeln!(log, "{},error,{}", csv_field(id), csv_field(&e.to_string())).unwrap();
                writeln!(errors, "{},{}", csv_field(id), csv_field(&e.to_string())).unwrap();
            }
        }
    }
    let log_path = config.out.join("preprocess_log.csv");
    let err_path = config.out.join("preprocess_errors.csv");
    write_atomic_str(&log_path, &log)?;
    write_atomic_str(&err_path, &errors)?;
    info!(
        "preprocessed {} of {} images into {}",
        results.len() - outcome.failures,
        results.len(),
        out_dir.display()
    );
    outcome.written = vec![out_dir, log_path, err_path];
    Ok(outcome)
}

/// Returns the stage trace on success.
fn preprocess_one(
    config: &RunConfig,
    images_dir: &Path,
    out_dir: &Path,
    id: &str,
) -> Result<String> {
    let path = find_image(images_dir, id).ok_or_else(|| {
        Error::invalid(format!(
            "no image file for {id} in {}",
            images_dir.display()
        ))
    })?;
    let image = load_rgb(&path)?;
    let traced = preprocess_traced(&image, &config.preprocess, config.debug_stages)?;
    for (k, stage_img) in traced.intermediates.iter().enumerate() {
        save_png(stage_img, &out_dir.join(format!("{id}.stage{}.png", k + 1)))?;
    }
    save_png(&traced.image, &out_dir.join(format!("{id}.png")))?;
    Ok(traced
        .trace
        .iter()
        .map(|s| s.name())
        .collect::<Vec<_>>()
        .join("|"))
}

pub fn cmd_split(config: &RunConfig) -> Result<Outcome> {
    let manifest = pruned_manifest(config)?;
    let dataset = dataset_of(config, &manifest)?;
    let policy = config
        .split_policy
        .clone()
        .unwrap_or_else(|| SplitPolicy::for_dataset(dataset));
    let assignments = make_splits(&manifest, dataset, config.seed, &policy)?;

    let splits_path = config.splits_path();
    write_splits(&assignments, &splits_path)?;

    let mut table = String::from("task,split,class,count\n");
    for task in Task::ALL {
        let dist = class_distribution(&assignments, &manifest, task)?;
        for split in Split::ALL {
            for (class, n) in dist.split(split).iter().enumerate() {
                writeln!(table, "{task},{split},{class},{n}").unwrap();
            }
        }
    }
    let dist_path = config.out.join("distribution.csv");
    write_atomic_str(&dist_path, &table)?;

    let dist = class_distribution(&assignments, &manifest, config.task)?;
    println!(
        "{dataset} {} class distribution (seed {})",
        config.task, config.seed
    );
    println!(
        "{:>6} {:>10} {:>10} {:>10}",
        "class", "train", "validate", "test"
    );
    for c in 0..config.task.class_count() {
        println!(
            "{c:>6} {:>10} {:>10} {:>10}",
            dist.split(Split::Train)[c],
            dist.split(Split::Validate)[c],
            dist.split(Split::Test)[c]
        );
    }
    println!(
        "{:>6} {:>10} {:>10} {:>10}",
        "total",
        dist.total(Split::Train),
        dist.total(Split::Validate),
        dist.total(Split::Test)
    );

    let mut outcome = Outcome::default();
    for check in IdentityCheck::all(&assignments, &manifest)? {
        println!("{check}");
        if !check.passed() {
            outcome.failures += 1;
        }
    }
    outcome.written = vec![splits_path, dist_path];
    Ok(outcome)
}

struct LabeledSplits {
    manifest: HashMap<String, ManifestEntry>,
    assignments: Vec<SplitAssignment>,
}

impl LabeledSplits {
    fn load(config: &RunConfig) -> Result<Self> {
        let manifest = load_manifest(config.manifest_path()?)?
            .into_iter()
            .map(|e| (e.image_id.clone(), e))
            .collect::<HashMap<_, _>>();
        let path = config.splits_path();
        if !path.exists() {
            return Err(Error::invalid(format!(
                "split file {} not found; run `rgp split` first",
                path.display()
            )));
        }
        let assignments = load_splits(&path)?;
        if let Some(a) = assignments
            .iter()
            .find(|a| !manifest.contains_key(&a.image_id))
        {
            return Err(Error::invalid(format!(
                "split references unknown image {:?}",
                a.image_id
            )));
        }
        Ok(Self {
            manifest,
            assignments,
        })
    }

    fn ids(&self, split: Split) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|a| a.split == split)
            .map(|a| a.image_id.as_str())
            .collect()
    }

    fn label(&self, id: &str, task: Task) -> Result<usize> {
        let e = &self.manifest[id];
        map_grade(e.dataset, e.native_grade as i64, task)
    }
}

pub fn cmd_train_baseline(config: &RunConfig) -> Result<Outcome> {
    let data = LabeledSplits::load(config)?;
    let processed = config.processed_dir();
    let side = config.baseline.thumbnail_side;
    let task = config.task;
    let mut outcome = Outcome::default();

    let mut load_split = |split: Split| -> Result<Vec<(FeatureVector, usize)>> {
        let mut out = Vec::new();
        for id in data.ids(split) {
            let path = processed.join(format!("{id}.png"));
            match load_rgb(&path).and_then(|img| featurize(id, &img, side)) {
                Ok(f) => out.push((f, data.label(id, task)?)),
                Err(e) => {
                    warn!("{id}: skipped ({e})");
                    outcome.failures += 1;
                }
            }
        }
        Ok(out)
    };
    let train = load_split(Split::Train)?;
    let validate = load_split(Split::Validate)?;
    let test = load_split(Split::Test)?;
    if train.is_empty() {
        return Err(Error::invalid("no usable training images"));
    }

    let xs: Vec<&[f64]> = train.iter().map(|(f, _)| f.values.as_slice()).collect();
    let ys: Vec<usize> = train.iter().map(|(_, y)| *y).collect();
    let mut log = String::from("epoch,loss,validation_accuracy\n");
    let trained = train_softmax_with(&xs, &ys, task, &config.baseline, |epoch, loss, model| {
        let correct = validate
            .iter()
            .filter(|(f, y)| {
                model
                    .predict_probs(&f.values)
                    .map(|p| crate::ensemble::argmax(&p) == *y)
                    .unwrap_or(false)
            })
            .count();
        let acc = if validate.is_empty() {
            String::new()
        } else {
            format!("{}", correct as f64 / validate.len() as f64)
        };
        writeln!(log, "{epoch},{loss},{acc}").unwrap();
    })?;
    info!(
        "trained baseline on {} images: loss {:.6} -> {:.6}",
        train.len(),
        trained.losses[0],
        trained.final_loss()
    );

    let model_path = config.out.join("baseline_model.json");
    trained.model.save(&model_path)?;
    let log_path = config.out.join("train_log.csv");
    write_atomic_str(&log_path, &log)?;

    let preds = test
        .iter()
        .map(|(f, _)| trained.model.predict("baseline", f))
        .collect::<Result<Vec<PredictionRecord>>>()?;
    let pred_path = config.predictions_dir().join("baseline.csv");
    write_predictions(&preds, task.class_count(), &pred_path)?;

    outcome.written = vec![model_path, log_path, pred_path];
    Ok(outcome)
}

pub fn cmd_evaluate(config: &RunConfig) -> Result<Outcome> {
    let data = LabeledSplits::load(config)?;
    let task = config.task;
    let k = task.class_count();
    let test_ids: BTreeSet<String> = data
        .ids(Split::Test)
        .into_iter()
        .map(String::from)
        .collect();
    if test_ids.is_empty() {
        return Err(Error::invalid("test split is empty"));
    }

    let pred_dir = config.predictions_dir();
    let mut files: Vec<PathBuf> = fs::read_dir(&pred_dir)
        .map_err(|e| Error::invalid(format!("predictions dir {}: {e}", pred_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "no prediction CSV files in {}",
            pred_dir.display()
        )));
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for path in &files {
        let loaded = load_predictions(path, k, Some(&test_ids))?;
        if !loaded.coverage.extra.is_empty() {
            warn!(
                "{}: {} ids outside the test split ignored",
                path.display(),
                loaded.coverage.extra.len()
            );
        }
        for r in loaded.records {
            if !test_ids.contains(&r.image_id) {
                continue;
            }
            if !seen.insert((r.image_id.clone(), r.model_id.clone())) {
                return Err(Error::invalid(format!(
                    "{}: model {:?} predicts image {:?} in more than one file",
                    path.display(),
                    r.model_id,
                    r.image_id
                )));
            }
            records.push(r);
        }
    }

    let mut by_image: HashMap<String, Vec<PredictionRecord>> = HashMap::new();
    for r in records {
        by_image.entry(r.image_id.clone()).or_default().push(r);
    }
    let inputs: Vec<EnsembleInput> = test_ids
        .iter()
        .map(|id| EnsembleInput {
            image_id: id.clone(),
            records: by_image.remove(id).unwrap_or_default(),
        })
        .collect();
    let batch = fuse_batch(&inputs, config.strategy)?;

    let coverage = batch.diagnoses.len() as f64 / test_ids.len() as f64;
    let mut gaps = String::new();
    for id in &batch.omissions {
        writeln!(gaps, "{id}").unwrap();
    }
    let gaps_path = config.out.join("coverage_gaps.txt");
    write_atomic_str(&gaps_path, &gaps)?;
    if !batch.omissions.is_empty() {
        warn!(
            "{} of {} test images have no predictions (listed in {})",
            batch.omissions.len(),
            test_ids.len(),
            gaps_path.display()
        );
    }
    if coverage < config.coverage_threshold {
        return Err(Error::invalid(format!(
            "prediction coverage {:.4} below threshold {:.4}",
            coverage, config.coverage_threshold
        )));
    }

    let labels = batch
        .diagnoses
        .iter()
        .map(|d| data.label(&d.image_id, task))
        .collect::<Result<Vec<_>>>()?;
    let probs: Vec<Vec<f64>> = batch
        .diagnoses
        .iter()
        .map(|d| d.fused_probs.clone())
        .collect();
    let report = evaluate(task, &probs, &labels, config.target_specificity)?;

    let out = &config.out;
    let diag_path = out.join("diagnoses.csv");
    write_diagnoses(&batch.diagnoses, k, &diag_path)?;
    let report_path = out.join("metrics.json");
    write_atomic_str(&report_path, &report.to_json()?)?;
    let cm_path = out.join("confusion_matrix.csv");
    write_atomic_str(&cm_path, &report.confusion_matrix.to_csv())?;
    let summary_path = out.join("summary.txt");
    write_atomic_str(&summary_path, &report.summary())?;
    print!("{}", report.summary());

    let mut written = vec![diag_path, report_path, cm_path, summary_path, gaps_path];
    let plots: Vec<(usize, String)> = if task.is_binary() {
        vec![(1, format!("roc_{task}.svg"))]
    } else {
        (0..k)
            .map(|c| (c, format!("roc_{task}_class{c}.svg")))
            .collect()
    };
    for (class, name) in plots {
        let scores: Vec<f64> = probs.iter().map(|p| p[class]).collect();
        let positive: Vec<bool> = labels.iter().map(|&l| l == class).collect();
        match roc_curve(&scores, &positive) {
            Ok(curve) => {
                let title = if task.is_binary() {
                    format!("{task}")
                } else {
                    format!("{task} class {class} vs rest")
                };
                let path = out.join(name);
                write_atomic_str(&path, &roc_svg(&curve, &title, crate::metrics::auc(&curve)))?;
                written.push(path);
            }
            Err(e) => warn!("no ROC plot for class {class}: {e}"),
        }
    }

    Ok(Outcome {
        failures: batch.omissions.len(),
        written,
    })
}

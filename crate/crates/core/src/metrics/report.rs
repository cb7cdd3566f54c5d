use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{
    accuracy, auc_from_scores, binary_rates, confusion_matrix, per_class_rates,
    sensitivity_at_specificity, ConfusionMatrix,
};
use crate::dataset::Task;
use crate::ensemble::argmax;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRates {
    pub class: usize,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointInfo {
    pub description: String,
    pub target_specificity: Option<f64>,
    pub threshold: Option<f64>,
}

/// All rates are fractions in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: Task,
    pub accuracy: f64,
    pub auc: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub per_class: Vec<ClassRates>,
    pub confusion_matrix: ConfusionMatrix,
    pub operating_point: OperatingPointInfo,
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Percent table with two decimals.
    pub fn summary(&self) -> String {
        let pct = |v: f64| format!("{:.2}", v * 100.0);
        let mut out = String::new();
        writeln!(out, "task         {}", self.task).unwrap();
        writeln!(out, "accuracy (%) {}", pct(self.accuracy)).unwrap();
        writeln!(out, "AUC (%)      {}", pct(self.auc)).unwrap();
        writeln!(out, "sensitivity  {}", pct(self.sensitivity)).unwrap();
        writeln!(out, "specificity  {}", pct(self.specificity)).unwrap();
        writeln!(out, "operating    {}", self.operating_point.description).unwrap();
        out
    }
}

fn validate_probs(probs: &[Vec<f64>], labels: &[usize], k: usize) -> Result<()> {
    if probs.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} probability rows but {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if probs.is_empty() {
        return Err(Error::invalid("no samples to evaluate"));
    }
    if let Some(row) = probs.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: row.len(),
        });
    }
    Ok(())
}

fn class_rates(cm: &ConfusionMatrix) -> Vec<ClassRates> {
    per_class_rates(cm)
        .into_iter()
        .enumerate()
        .map(|(class, r)| ClassRates {
            class,
            sensitivity: r.sensitivity,
            specificity: r.specificity,
        })
        .collect()
}

/// Binary task, class 1 positive. With a target specificity the reported
/// sensitivity/specificity come from the best cut on `p1` meeting it;
/// otherwise from the argmax decision.
pub fn binary_metrics(
    task: Task,
    probs: &[Vec<f64>],
    labels: &[usize],
    target_specificity: Option<f64>,
) -> Result<MetricsReport> {
    if !task.is_binary() {
        return Err(Error::invalid(format!("{task} is not a binary task")));
    }
    validate_probs(probs, labels, 2)?;
    let predicted: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
    let cm = confusion_matrix(labels, &predicted, 2)?;
    let scores: Vec<f64> = probs.iter().map(|p| p[1]).collect();
    let positive: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
    let auc = auc_from_scores(&scores, &positive)?;

    let (sensitivity, specificity, operating_point) = match target_specificity {
        Some(target) => {
            let op = sensitivity_at_specificity(&scores, &positive, target)?;
            let cut = op
                .threshold
                .map_or("no positive calls".to_string(), |t| format!("p1 >= {t}"));
            (
                op.sensitivity,
                op.specificity,
                OperatingPointInfo {
                    description: format!(
                        "best sensitivity with specificity >= {:.2}% ({cut})",
                        target * 100.0
                    ),
                    target_specificity: Some(target),
                    threshold: op.threshold,
                },
            )
        }
        None => {
            let r = binary_rates(&cm)?;
            (
                r.sensitivity.expect("both classes present"),
                r.specificity.expect("both classes present"),
                OperatingPointInfo {
                    description: "argmax decision".into(),
                    target_specificity: None,
                    threshold: None,
                },
            )
        }
    };
    Ok(MetricsReport {
        task,
        accuracy: accuracy(&cm)?,
        auc,
        sensitivity,
        specificity,
        per_class: class_rates(&cm),
        confusion_matrix: cm,
        operating_point,
    })
}

/// Argmax accuracy plus macro one-vs-rest AUC, recall and true-negative
/// rate. Classes absent from `labels` are left out of the macro averages.
pub fn multiclass_metrics(
    task: Task,
    probs: &[Vec<f64>],
    labels: &[usize],
) -> Result<MetricsReport> {
    let k = task.class_count();
    if k < 3 {
        return Err(Error::invalid(format!("{task} has fewer than 3 classes")));
    }
    validate_probs(probs, labels, k)?;
    let predicted: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
    let cm = confusion_matrix(labels, &predicted, k)?;
    let rates = per_class_rates(&cm);

    let (mut aucs, mut sens, mut specs) = (Vec::new(), Vec::new(), Vec::new());
    for c in 0..k {
        let positive: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        if !positive.contains(&true) {
            warn!("class {c} absent from labels; excluded from macro averages");
            continue;
        }
        let scores: Vec<f64> = probs.iter().map(|p| p[c]).collect();
        match auc_from_scores(&scores, &positive) {
            Ok(a) => aucs.push(a),
            Err(Error::AucUndefined(msg)) => {
                warn!("class {c}: {msg}; excluded from macro averages");
                continue;
            }
            Err(e) => return Err(e),
        }
        sens.extend(rates[c].sensitivity);
        specs.extend(rates[c].specificity);
    }
    let mean = |v: &[f64]| -> Result<f64> {
        if v.is_empty() {
            Err(Error::AucUndefined(
                "no class has both positives and negatives".into(),
            ))
        } else {
            Ok(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    Ok(MetricsReport {
        task,
        accuracy: accuracy(&cm)?,
        auc: mean(&aucs)?,
        sensitivity: mean(&sens)?,
        specificity: mean(&specs)?,
        per_class: class_rates(&cm),
        confusion_matrix: cm,
        operating_point: OperatingPointInfo {
            description: "argmax decision; macro average over one-vs-rest classes".into(),
            target_specificity: None,
            threshold: None,
        },
    })
}

pub fn evaluate(
    task: Task,
    probs: &[Vec<f64>],
    labels: &[usize],
    target_specificity: Option<f64>,
) -> Result<MetricsReport> {
    if task.is_binary() {
        binary_metrics(task, probs, labels, target_specificity)
    } else {
        multiclass_metrics(task, probs, labels)
    }
}

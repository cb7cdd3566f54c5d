use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve from (0,0) to (1,1). `thresholds[i]` is the cut for
/// `points[i]` (samples with `score >= cut` are called positive); the
/// first cut is +inf.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub thresholds: Vec<f64>,
    /// Cumulative (true positive, false positive) counts at each point.
    counts: Vec<(u64, u64)>,
    positives: u64,
    negatives: u64,
}

impl RocCurve {
    pub fn positives(&self) -> u64 {
        self.positives
    }

    pub fn negatives(&self) -> u64 {
        self.negatives
    }
}

fn check_scores(scores: &[f64], labels: &[bool]) -> Result<(u64, u64)> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("NaN score"));
    }
    let p = labels.iter().filter(|&&l| l).count() as u64;
    let n = labels.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(Error::AucUndefined(format!(
            "need both classes, got {p} positive and {n} negative samples"
        )));
    }
    Ok((p, n))
}

/// Sweeps the distinct scores in descending order; tied scores move the
/// curve in one diagonal step.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    let (p, n) = check_scores(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut counts = vec![(0u64, 0u64)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        counts.push((tp, fp));
        thresholds.push(s);
    }
    let points = counts
        .iter()
        .map(|&(tp, fp)| RocPoint {
            fpr: fp as f64 / n as f64,
            tpr: tp as f64 / p as f64,
        })
        .collect();
    Ok(RocCurve {
        points,
        thresholds,
        counts,
        positives: p,
        negatives: n,
    })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

/// Trapezoidal AUC accumulated in integer counts, divided once at the end.
pub fn auc_from_scores(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let curve = roc_curve(scores, labels)?;
    let twice_area: u128 = curve
        .counts
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) as u128 * (w[0].0 + w[1].0) as u128)
        .sum();
    Ok(twice_area as f64 / (2.0 * curve.positives as f64 * curve.negatives as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub target_specificity: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Samples with `score >= threshold` are positive; `None` when no
    /// sample is called positive.
    pub threshold: Option<f64>,
}

/// Best sensitivity among cuts whose specificity reaches `target`. Ties go
/// to the higher specificity.
pub fn sensitivity_at_specificity(
    scores: &[f64],
    labels: &[bool],
    target: f64,
) -> Result<OperatingPoint> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::invalid(format!(
            "target specificity {target} outside [0, 1]"
        )));
    }
    let curve = roc_curve(scores, labels)?;
    let n = curve.negatives as f64;
    let p = curve.positives as f64;
    // tpr is non-decreasing along the curve, so the last admissible cut wins
    // unless an earlier one has the same tpr and a higher specificity.
    let mut best: Option<usize> = None;
    for (i, &(tp, fp)) in curve.counts.iter().enumerate() {
        let spec = (curve.negatives - fp) as f64 / n;
        if spec < target {
            break;
        }
        match best {
            Some(b) if curve.counts[b].0 >= tp => {}
            _ => best = Some(i),
        }
    }
    let b = best.expect("the +inf cut has specificity 1");
    let (tp, fp) = curve.counts[b];
    Ok(OperatingPoint {
        target_specificity: target,
        sensitivity: tp as f64 / p,
        specificity: (curve.negatives - fp) as f64 / n,
        threshold: (b > 0).then(|| curve.thresholds[b]),
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are the true class, columns the predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub k: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if k == 0 || counts.iter().any(|r| r.len() != k) {
            return Err(Error::invalid(
                "confusion matrix must be square and non-empty",
            ));
        }
        Ok(Self { k, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_total(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn col_total(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.counts[i][i]).sum()
    }

    /// CSV with a header row of predicted classes and one row per true class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in 0..self.k {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            out.push_str(&i.to_string());
            for n in row {
                out.push_str(&format!(",{n}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn confusion_matrix(truth: &[usize], predicted: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::invalid(format!(
            "{} labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= k || p >= k {
            return Err(Error::invalid(format!(
                "class pair ({t}, {p}) outside [0, {k})"
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { k, counts })
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::invalid("accuracy of an empty confusion matrix"));
    }
    Ok(cm.trace() as f64 / total as f64)
}

/// `None` marks a rate whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryRates {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Class 1 is the positive class.
pub fn binary_rates(cm: &ConfusionMatrix) -> Result<BinaryRates> {
    if cm.k != 2 {
        return Err(Error::invalid(format!(
            "binary rates need a 2x2 matrix, got {}x{}",
            cm.k, cm.k
        )));
    }
    let [tn, fp] = [cm.counts[0][0], cm.counts[0][1]];
    let [fn_, tp] = [cm.counts[1][0], cm.counts[1][1]];
    Ok(BinaryRates {
        sensitivity: ratio(tp, tp + fn_),
        specificity: ratio(tn, tn + fp),
    })
}

/// One-vs-rest recall and true-negative rate for every class.
pub fn per_class_rates(cm: &ConfusionMatrix) -> Vec<BinaryRates> {
    let total = cm.total();
    (0..cm.k)
        .map(|c| {
            let tp = cm.counts[c][c];
            let positives = cm.row_total(c);
            let negatives = total - positives;
            let fp = cm.col_total(c) - tp;
            BinaryRates {
                sensitivity: ratio(tp, positives),
                specificity: ratio(negatives - fp, negatives),
            }
        })
        .collect()
}

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureVector, PredictionRecord};
use crate::dataset::Task;
use crate::error::{Error, Result};

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Multinomial logistic regression: `probs = softmax(W x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    pub task: Task,
    pub dim: usize,
    /// One row of `dim` weights per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: SoftmaxModel,
}

const MODEL_FORMAT: &str = "rgp-softmax";
const MODEL_VERSION: u32 = 1;

impl SoftmaxModel {
    pub fn zeros(task: Task, dim: usize) -> Self {
        let k = task.class_count();
        Self {
            task,
            dim,
            weights: vec![vec![0.0; dim]; k],
            bias: vec![0.0; k],
        }
    }

    pub fn classes(&self) -> usize {
        self.bias.len()
    }

    fn check(&self) -> Result<()> {
        let k = self.task.class_count();
        if self.bias.len() != k
            || self.weights.len() != k
            || self.weights.iter().any(|r| r.len() != self.dim)
        {
            return Err(Error::invalid(
                "model shape does not match its task and dimension",
            ));
        }
        if self
            .weights
            .iter()
            .flatten()
            .chain(&self.bias)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("model has non-finite parameters"));
        }
        Ok(())
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect())
    }

    pub fn predict_probs(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(x)?))
    }

    pub fn predict(&self, model_id: &str, feature: &FeatureVector) -> Result<PredictionRecord> {
        Ok(PredictionRecord {
            image_id: feature.image_id.clone(),
            model_id: model_id.to_string(),
            probs: self.predict_probs(&feature.values)?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        crate::fsutil::write_atomic(path, &serde_json::to_vec(&file)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ModelFile = serde_json::from_slice(&fs::read(path)?)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::invalid(format!(
                "{}: unsupported model format {} v{}",
                path.display(),
                file.format,
                file.version
            )));
        }
        file.model.check()?;
        Ok(file.model)
    }
}

/// Mean cross-entropy plus `l2 * ||W||^2 / 2` and its gradient. The bias
/// is not regularized.
#[derive(Debug, Clone)]
pub struct Objective {
    pub loss: f64,
    pub grad_weights: Vec<Vec<f64>>,
    pub grad_bias: Vec<f64>,
}

pub fn objective(
    model: &SoftmaxModel,
    features: &[&[f64]],
    labels: &[usize],
    l2: f64,
) -> Result<Objective> {
    let k = model.classes();
    let n = features.len();
    let mut loss = 0.0;
    let mut grad_weights = vec![vec![0.0; model.dim]; k];
    let mut grad_bias = vec![0.0; k];
    for (x, &y) in features.iter().zip(labels) {
        let logits = model.logits(x)?;
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
        loss += log_sum - logits[y];
        for c in 0..k {
            let p = (logits[c] - log_sum).exp();
            let delta = p - if c == y { 1.0 } else { 0.0 };
            grad_bias[c] += delta;
            for (g, v) in grad_weights[c].iter_mut().zip(x.iter()) {
                *g += delta * v;
            }
        }
    }
    let scale = 1.0 / n as f64;
    let mut penalty = 0.0;
    for (grow, wrow) in grad_weights.iter_mut().zip(&model.weights) {
        for (g, w) in grow.iter_mut().zip(wrow) {
            *g = *g * scale + l2 * w;
            penalty += w * w;
        }
    }
    grad_bias.iter_mut().for_each(|g| *g *= scale);
    Ok(Objective {
        loss: loss * scale + 0.5 * l2 * penalty,
        grad_weights,
        grad_bias,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// The objective's gradient is Lipschitz with constant at most
    /// (d + 1) / 2 + l2 for features in [0, 1]^d, so steps below about
    /// 4 / (d + 1) never increase the loss. The default is safe for 32x32
    /// RGB thumbnails (d = 3072).
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Unused by full-batch descent from zero weights; kept so that any
    /// future sampling draws from the run seed.
    pub seed: u64,
    /// Thumbnail side used to featurize images.
    pub thumbnail_side: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 200,
            l2: 1e-4,
            seed: 0,
            thumbnail_side: 32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: SoftmaxModel,
    /// Objective before each update, followed by the final value.
    pub losses: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().unwrap()
    }
}

pub fn train_softmax(
    features: &[&[f64]],
    labels: &[usize],
    task: Task,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_softmax_with(features, labels, task, config, |_, _, _| {})
}

/// Full-batch gradient descent from zero weights. `on_epoch` sees the epoch
/// index, the objective at the current parameters, and the model.
pub fn train_softmax_with(
    features: &[&[f64]],
    labels: &[usize],
    task: Task,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64, &SoftmaxModel),
) -> Result<TrainOutcome> {
    if features.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} feature vectors but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let k = task.class_count();
    let dim = features.first().map_or(0, |x| x.len());
    if let Some(x) = features.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.len(),
        });
    }
    let mut per_class = vec![0usize; k];
    for &y in labels {
        if y >= k {
            return Err(Error::invalid(format!("label {y} outside [0, {k})")));
        }
        per_class[y] += 1;
    }
    if let Some(c) = per_class.iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!("class {c} has no training samples")));
    }

    let mut model = SoftmaxModel::zeros(task, dim);
    let mut losses = Vec::with_capacity(config.epochs + 1);
    let mut last_finite = f64::NAN;
    for epoch in 0..=config.epochs {
        let obj = objective(&model, features, labels, config.l2)?;
        if !obj.loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                last_finite_loss: last_finite,
            });
        }
        last_finite = obj.loss;
        losses.push(obj.loss);
        on_epoch(epoch, obj.loss, &model);
        if epoch == config.epochs {
            break;
        }
        let lr = config.learning_rate;
        for (wrow, grow) in model.weights.iter_mut().zip(&obj.grad_weights) {
            for (w, g) in wrow.iter_mut().zip(grow) {
                *w -= lr * g;
            }
        }
        for (b, g) in model.bias.iter_mut().zip(&obj.grad_bias) {
            *b -= lr * g;
        }
    }
    Ok(TrainOutcome { model, losses })
}

//! Per-image fusion of model probability vectors into a diagnosis.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::PredictionRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Strategy {
    #[default]
    #[serde(rename = "mean")]
    MeanProb,
    #[serde(rename = "vote")]
    MajorityVote,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::MeanProb => "mean",
            Strategy::MajorityVote => "vote",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Strategy::MeanProb),
            "vote" => Ok(Strategy::MajorityVote),
            _ => Err(Error::invalid(format!(
                "unknown strategy {s:?} (expected mean or vote)"
            ))),
        }
    }
}

/// All model outputs for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleInput {
    pub image_id: String,
    pub records: Vec<PredictionRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosis {
    pub image_id: String,
    pub fused_probs: Vec<f64>,
    pub predicted_class: usize,
    pub strategy: Strategy,
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn class_count(input: &EnsembleInput) -> Result<usize> {
    let first = input.records.first().ok_or_else(|| {
        Error::invalid(format!(
            "image {:?} has no prediction records",
            input.image_id
        ))
    })?;
    let k = first.probs.len();
    if k == 0 {
        return Err(Error::invalid("empty probability vector"));
    }
    if let Some(r) = input.records.iter().find(|r| r.probs.len() != k) {
        return Err(Error::invalid(format!(
            "image {:?}: model {:?} has {} classes, expected {k}",
            input.image_id,
            r.model_id,
            r.probs.len()
        )));
    }
    let mut ids = HashSet::new();
    if let Some(r) = input
        .records
        .iter()
        .find(|r| !ids.insert(r.model_id.as_str()))
    {
        return Err(Error::invalid(format!(
            "image {:?}: model {:?} appears twice",
            input.image_id, r.model_id
        )));
    }
    Ok(k)
}

/// Arithmetic mean of the member vectors. Members are summed in a
/// canonical order (sorted by their probability vectors) so the result is
/// bit-identical under any reordering of the records.
fn mean_probs(records: &[PredictionRecord], k: usize) -> Vec<f64> {
    let mut rows: Vec<&[f64]> = records.iter().map(|r| r.probs.as_slice()).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    let mut sum = vec![0.0; k];
    for row in rows {
        for (s, p) in sum.iter_mut().zip(row) {
            *s += p;
        }
    }
    let n = records.len() as f64;
    sum.into_iter().map(|s| s / n).collect()
}

pub fn fuse_mean(input: &EnsembleInput) -> Result<Diagnosis> {
    let k = class_count(input)?;
    let fused = mean_probs(&input.records, k);
    Ok(Diagnosis {
        image_id: input.image_id.clone(),
        predicted_class: argmax(&fused),
        fused_probs: fused,
        strategy: Strategy::MeanProb,
    })
}

/// Each model votes for its argmax. A tie on votes is settled by the mean
/// probability of the tied classes, then by the smallest index. The
/// reported vector holds the vote shares.
pub fn fuse_majority(input: &EnsembleInput) -> Result<Diagnosis> {
    let k = class_count(input)?;
    let mut votes = vec![0usize; k];
    for r in &input.records {
        votes[argmax(&r.probs)] += 1;
    }
    let top = *votes.iter().max().unwrap();
    let tied: Vec<usize> = (0..k).filter(|&c| votes[c] == top).collect();
    let predicted = if tied.len() == 1 {
        tied[0]
    } else {
        let mean = mean_probs(&input.records, k);
        let mut best = tied[0];
        for &c in &tied[1..] {
            if mean[c] > mean[best] {
                best = c;
            }
        }
        best
    };
    let n = input.records.len() as f64;
    Ok(Diagnosis {
        image_id: input.image_id.clone(),
        fused_probs: votes.iter().map(|&v| v as f64 / n).collect(),
        predicted_class: predicted,
        strategy: Strategy::MajorityVote,
    })
}

pub fn fuse(input: &EnsembleInput, strategy: Strategy) -> Result<Diagnosis> {
    match strategy {
        Strategy::MeanProb => fuse_mean(input),
        Strategy::MajorityVote => fuse_majority(input),
    }
}

/// Groups records by image id (sorted), keeping file order within an image.
pub fn group_records(records: impl IntoIterator<Item = PredictionRecord>) -> Vec<EnsembleInput> {
    let mut by_image: BTreeMap<String, Vec<PredictionRecord>> = BTreeMap::new();
    for r in records {
        by_image.entry(r.image_id.clone()).or_default().push(r);
    }
    by_image
        .into_iter()
        .map(|(image_id, records)| EnsembleInput { image_id, records })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchResult {
    pub diagnoses: Vec<Diagnosis>,
    /// Images that had no records to fuse.
    pub omissions: Vec<String>,
}

/// Fuses every input independently; output sorted by image id.
pub fn fuse_batch(inputs: &[EnsembleInput], strategy: Strategy) -> Result<BatchResult> {
    let mut ids = BTreeSet::new();
    if let Some(dup) = inputs.iter().find(|i| !ids.insert(i.image_id.as_str())) {
        return Err(Error::invalid(format!(
            "image {:?} appears in two inputs",
            dup.image_id
        )));
    }
    let mut sorted: Vec<&EnsembleInput> = inputs.iter().collect();
    sorted.sort_by(|a, b| a.image_id.cmp(&b.image_id));

    let mut result = BatchResult::default();
    for input in sorted {
        if input.records.is_empty() {
            result.omissions.push(input.image_id.clone());
        } else {
            result.diagnoses.push(fuse(input, strategy)?);
        }
    }
    Ok(result)
}

/// `image_id,strategy,predicted_class,p0..pK-1`
pub fn write_diagnoses_to<W: Write>(
    diagnoses: &[Diagnosis],
    classes: usize,
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![
        "image_id".to_string(),
        "strategy".into(),
        "predicted_class".into(),
    ];
    header.extend((0..classes).map(|c| format!("p{c}")));
    wtr.write_record(&header)?;
    for d in diagnoses {
        if d.fused_probs.len() != classes {
            return Err(Error::DimensionMismatch {
                expected: classes,
                actual: d.fused_probs.len(),
            });
        }
        let mut row = vec![
            d.image_id.clone(),
            d.strategy.to_string(),
            d.predicted_class.to_string(),
        ];
        row.extend(d.fused_probs.iter().map(|p| format!("{p:.16e}")));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_diagnoses(diagnoses: &[Diagnosis], classes: usize, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_diagnoses_to(diagnoses, classes, &mut buf)?;
    crate::fsutil::write_atomic(path, &buf)
}

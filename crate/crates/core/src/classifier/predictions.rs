use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Largest accepted deviation of a probability row's sum from 1.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

/// One model's class probabilities for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub image_id: String,
    pub model_id: String,
    pub probs: Vec<f64>,
}

impl PredictionRecord {
    pub fn check_simplex(&self) -> std::result::Result<(), String> {
        if let Some(p) = self.probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(format!(
                "probability {p} is not a finite non-negative number"
            ));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(format!("probabilities sum to {sum}"));
        }
        Ok(())
    }
}

/// Ids present in the file versus the ids that were expected.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coverage {
    pub missing: Vec<String>,
    pub extra: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedPredictions {
    pub records: Vec<PredictionRecord>,
    pub coverage: Coverage,
}

fn header(classes: usize) -> Vec<String> {
    let mut h = vec!["image_id".to_string(), "model_id".to_string()];
    h.extend((0..classes).map(|c| format!("p{c}")));
    h
}

/// Writes prediction rows with 17 significant digits so that reloading
/// reproduces the exact values.
pub fn write_predictions_to<W: Write>(
    records: &[PredictionRecord],
    classes: usize,
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header(classes))?;
    for r in records {
        if r.probs.len() != classes {
            return Err(Error::DimensionMismatch {
                expected: classes,
                actual: r.probs.len(),
            });
        }
        let mut row = vec![r.image_id.clone(), r.model_id.clone()];
        row.extend(r.probs.iter().map(|p| format!("{p:.16e}")));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_predictions(records: &[PredictionRecord], classes: usize, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_predictions_to(records, classes, &mut buf)?;
    crate::fsutil::write_atomic(path, &buf)
}

pub fn load_predictions(
    path: &Path,
    classes: usize,
    expected_ids: Option<&BTreeSet<String>>,
) -> Result<LoadedPredictions> {
    read_predictions(fs::File::open(path)?, path, classes, expected_ids)
}

/// Parses and validates a prediction file for a `classes`-way task.
pub fn read_predictions<R: Read>(
    reader: R,
    origin: &Path,
    classes: usize,
    expected_ids: Option<&BTreeSet<String>>,
) -> Result<LoadedPredictions> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let expected_header = header(classes);
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map_or(i as u64 + 1, |p| p.line());
        let err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        if i == 0 {
            if row.len() != expected_header.len()
                || !row.iter().take(2).eq(["image_id", "model_id"])
            {
                return Err(err(format!(
                    "expected {} columns ({}) for a {classes}-class task",
                    expected_header.len(),
                    expected_header.join(",")
                )));
            }
            if row.iter().ne(expected_header.iter().map(String::as_str)) {
                return Err(err(format!(
                    "expected header {}",
                    expected_header.join(",")
                )));
            }
            continue;
        }
        if row.len() != expected_header.len() {
            return Err(err(format!(
                "expected {} fields, found {}",
                expected_header.len(),
                row.len()
            )));
        }
        let probs = row
            .iter()
            .skip(2)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| err(format!("{s:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        let record = PredictionRecord {
            image_id: row[0].to_string(),
            model_id: row[1].to_string(),
            probs,
        };
        record.check_simplex().map_err(err)?;
        if !seen.insert((record.image_id.clone(), record.model_id.clone())) {
            return Err(err(format!(
                "duplicate row for image {:?} and model {:?}",
                record.image_id, record.model_id
            )));
        }
        records.push(record);
    }

    let coverage = match expected_ids {
        None => Coverage::default(),
        Some(expected) => {
            let present: BTreeSet<&str> = records.iter().map(|r| r.image_id.as_str()).collect();
            Coverage {
                missing: expected
                    .iter()
                    .filter(|id| !present.contains(id.as_str()))
                    .cloned()
                    .collect(),
                extra: present
                    .iter()
                    .filter(|id| !expected.contains(**id))
                    .map(|id| id.to_string())
                    .collect(),
            }
        }
    };
    Ok(LoadedPredictions { records, coverage })
}

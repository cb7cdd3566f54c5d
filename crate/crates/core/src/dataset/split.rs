use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use super::{DatasetId, ManifestEntry, SourcePartition, Split};
use crate::error::{Error, Result};

pub const LARIBOISIERE: &str = "Lariboisière";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSelection {
    /// Images from the source test partition; a seeded sample of `count`
    /// when given, all of them otherwise.
    SourcePartition { count: Option<usize> },
    /// Every image acquired at the named site.
    Site { name: String },
}

/// How a dataset is divided into train / validate / test.
///
/// For `SourcePartition` the pool is the source train partition; for
/// `Site` it is every image not taken for test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPolicy {
    pub train: usize,
    /// `None` assigns the rest of the pool to validation.
    pub validate: Option<usize>,
    pub test: TestSelection,
}

impl SplitPolicy {
    /// 30000 train, remaining 4469 of the pruned pool for validation, and
    /// 33423 images sampled from the test partition.
    pub fn eyepacs() -> Self {
        Self {
            train: 30_000,
            validate: None,
            test: TestSelection::SourcePartition {
                count: Some(33_423),
            },
        }
    }

    /// The 400 Lariboisière images for test; 700/100 on the remainder.
    pub fn messidor() -> Self {
        Self {
            train: 700,
            validate: None,
            test: TestSelection::Site {
                name: LARIBOISIERE.to_string(),
            },
        }
    }

    pub fn for_dataset(dataset: DatasetId) -> Self {
        match dataset {
            DatasetId::EyePACS => Self::eyepacs(),
            DatasetId::Messidor => Self::messidor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitAssignment {
    pub image_id: String,
    pub split: Split,
}

/// Case- and accent-insensitive site comparison.
fn same_site(a: &str, b: &str) -> bool {
    let fold = |s: &str| -> String {
        s.trim()
            .chars()
            .map(|c| match c {
                'è' | 'é' | 'ê' | 'È' | 'É' => 'e',
                c => c.to_ascii_lowercase(),
            })
            .collect()
    };
    fold(a) == fold(b)
}

/// Assigns splits for the entries of `dataset` in `manifest`.
///
/// Candidates are sorted by image id before shuffling, so the result does
/// not depend on manifest row order. The pool is shuffled first, then (for
/// sampled test sets) the test candidates, both from one SplitMix64 stream.
/// The returned list is sorted by image id.
pub fn make_splits(
    manifest: &[ManifestEntry],
    dataset: DatasetId,
    seed: u64,
    policy: &SplitPolicy,
) -> Result<Vec<SplitAssignment>> {
    let entries: Vec<&ManifestEntry> = manifest.iter().filter(|e| e.dataset == dataset).collect();
    let mut seen = HashSet::with_capacity(entries.len());
    for e in &entries {
        if !seen.insert(e.image_id.as_str()) {
            return Err(Error::invalid(format!(
                "duplicate image_id {:?}",
                e.image_id
            )));
        }
    }

    let (mut pool, mut test): (Vec<&str>, Vec<&str>) = match &policy.test {
        TestSelection::SourcePartition { .. } => {
            let pool = entries
                .iter()
                .filter(|e| e.source_partition == SourcePartition::Train)
                .map(|e| e.image_id.as_str())
                .collect();
            let test = entries
                .iter()
                .filter(|e| e.source_partition == SourcePartition::Test)
                .map(|e| e.image_id.as_str())
                .collect();
            (pool, test)
        }
        TestSelection::Site { name } => {
            let (test, pool): (Vec<&ManifestEntry>, Vec<&ManifestEntry>) = entries
                .iter()
                .partition(|e| e.site.as_deref().is_some_and(|s| same_site(s, name)));
            (
                pool.iter().map(|e| e.image_id.as_str()).collect(),
                test.iter().map(|e| e.image_id.as_str()).collect(),
            )
        }
    };
    pool.sort_unstable();
    test.sort_unstable();

    let validate = policy
        .validate
        .unwrap_or(pool.len().saturating_sub(policy.train));
    if policy.train + validate > pool.len() {
        return Err(Error::InfeasibleSplit(format!(
            "{dataset}: pool has {} images, policy needs {} train + {validate} validate",
            pool.len(),
            policy.train
        )));
    }
    let mut rng = SplitMix64::new(seed);
    rng.shuffle(&mut pool);

    if let TestSelection::SourcePartition { count: Some(n) } = policy.test {
        if n > test.len() {
            return Err(Error::InfeasibleSplit(format!(
                "{dataset}: test partition has {} images, policy needs {n}",
                test.len()
            )));
        }
        rng.shuffle(&mut test);
        test.truncate(n);
    }

    let mut out: Vec<SplitAssignment> = pool[..policy.train]
        .iter()
        .map(|id| (id, Split::Train))
        .chain(
            pool[policy.train..policy.train + validate]
                .iter()
                .map(|id| (id, Split::Validate)),
        )
        .chain(test.iter().map(|id| (id, Split::Test)))
        .map(|(id, split)| SplitAssignment {
            image_id: id.to_string(),
            split,
        })
        .collect();
    out.sort();
    Ok(out)
}

pub fn write_splits_to<W: Write>(assignments: &[SplitAssignment], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["image_id", "split"])?;
    for a in assignments {
        wtr.write_record([a.image_id.as_str(), a.split.as_str()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_splits(assignments: &[SplitAssignment], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_splits_to(assignments, &mut buf)?;
    crate::fsutil::write_atomic(path, &buf)
}

pub fn load_splits(path: &Path) -> Result<Vec<SplitAssignment>> {
    read_splits(fs::File::open(path)?, path)
}

pub fn read_splits<R: Read>(reader: R, origin: &Path) -> Result<Vec<SplitAssignment>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        if i == 0 {
            if record.iter().ne(["image_id", "split"]) {
                return Err(err("expected header image_id,split".into()));
            }
            continue;
        }
        if record.len() != 2 {
            return Err(err(format!("expected 2 fields, found {}", record.len())));
        }
        let split: Split = record[1].parse().map_err(|e: Error| err(e.to_string()))?;
        if !seen.insert(record[0].to_string()) {
            return Err(err(format!("image {:?} assigned twice", &record[0])));
        }
        out.push(SplitAssignment {
            image_id: record[0].to_string(),
            split,
        });
    }
    Ok(out)
}

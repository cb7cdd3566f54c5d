//! Manifests, grade harmonization between EyePACS and Messidor, pruning,
//! seeded splits and class-distribution tables.

mod distribution;
mod grades;
mod manifest;
pub mod rng;
mod split;

pub use distribution::{class_distribution, merge_counts, ClassDistribution, IdentityCheck};
pub use grades::{map_grade, quaternary_merge, GradeMap};
pub use manifest::{
    load_exclusions, load_manifest, prune, read_manifest, write_manifest, write_manifest_to,
    PruneReport, MANIFEST_HEADER,
};
pub use split::{
    load_splits, make_splits, read_splits, write_splits, write_splits_to, SplitAssignment,
    SplitPolicy, TestSelection, LARIBOISIERE,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetId {
    EyePACS,
    Messidor,
}

impl DatasetId {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetId::EyePACS => "EyePACS",
            DatasetId::Messidor => "Messidor",
        }
    }

    /// Highest native grade on the dataset's scale.
    pub fn max_grade(self) -> u8 {
        match self {
            DatasetId::EyePACS => 4,
            DatasetId::Messidor => 3,
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eyepacs" => Ok(DatasetId::EyePACS),
            "messidor" => Ok(DatasetId::Messidor),
            _ => Err(Error::invalid(format!("unknown dataset tag {s:?}"))),
        }
    }
}

/// Partition of the source distribution an image came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourcePartition {
    Train,
    Test,
    None,
}

impl SourcePartition {
    pub fn as_str(self) -> &'static str {
        match self {
            SourcePartition::Train => "train",
            SourcePartition::Test => "test",
            SourcePartition::None => "none",
        }
    }
}

impl FromStr for SourcePartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SourcePartition::Train),
            "test" => Ok(SourcePartition::Test),
            "none" | "" => Ok(SourcePartition::None),
            _ => Err(Error::invalid(format!("unknown source partition {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_id: String,
    pub dataset: DatasetId,
    pub native_grade: u8,
    pub source_partition: SourcePartition,
    /// Messidor acquisition site.
    pub site: Option<String>,
}

impl ManifestEntry {
    pub fn new(image_id: impl Into<String>, dataset: DatasetId, native_grade: u8) -> Result<Self> {
        if native_grade > dataset.max_grade() {
            return Err(Error::GradeOutOfRange {
                dataset: dataset.to_string(),
                grade: native_grade as i64,
            });
        }
        Ok(Self {
            image_id: image_id.into(),
            dataset,
            native_grade,
            source_partition: SourcePartition::None,
            site: None,
        })
    }

    pub fn with_partition(mut self, partition: SourcePartition) -> Self {
        self.source_partition = partition;
        self
    }

    pub fn with_site(mut self, site: impl Into<String>) -> Self {
        self.site = Some(site.into());
        self
    }
}

/// Grading task; the positive (higher-severity) class is always the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    #[serde(rename = "normal-abnormal")]
    BinaryNormalAbnormal,
    #[serde(rename = "referable")]
    BinaryReferable,
    Ternary,
    Quaternary,
}

impl Task {
    pub const ALL: [Task; 4] = [
        Task::BinaryNormalAbnormal,
        Task::BinaryReferable,
        Task::Ternary,
        Task::Quaternary,
    ];

    pub fn class_count(self) -> usize {
        match self {
            Task::BinaryNormalAbnormal | Task::BinaryReferable => 2,
            Task::Ternary => 3,
            Task::Quaternary => 4,
        }
    }

    pub fn is_binary(self) -> bool {
        self.class_count() == 2
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::BinaryNormalAbnormal => "normal-abnormal",
            Task::BinaryReferable => "referable",
            Task::Ternary => "ternary",
            Task::Quaternary => "quaternary",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validate,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validate, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validate => "validate",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Split::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown split {s:?}")))
    }
}

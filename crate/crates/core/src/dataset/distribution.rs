use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{map_grade, quaternary_merge, ManifestEntry, Split, SplitAssignment, Task};
use crate::error::{Error, Result};

/// Per-split, per-class image counts for one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDistribution {
    pub task: Task,
    pub counts: BTreeMap<Split, Vec<u64>>,
}

impl ClassDistribution {
    pub fn split(&self, split: Split) -> &[u64] {
        &self.counts[&split]
    }

    pub fn total(&self, split: Split) -> u64 {
        self.split(split).iter().sum()
    }
}

pub fn class_distribution(
    assignments: &[SplitAssignment],
    manifest: &[ManifestEntry],
    task: Task,
) -> Result<ClassDistribution> {
    let by_id: HashMap<&str, &ManifestEntry> =
        manifest.iter().map(|e| (e.image_id.as_str(), e)).collect();
    let mut counts: BTreeMap<Split, Vec<u64>> = Split::ALL
        .iter()
        .map(|&s| (s, vec![0; task.class_count()]))
        .collect();
    for a in assignments {
        let entry = by_id.get(a.image_id.as_str()).ok_or_else(|| {
            Error::invalid(format!("split references unknown image {:?}", a.image_id))
        })?;
        let class = map_grade(entry.dataset, entry.native_grade as i64, task)?;
        counts.get_mut(&a.split).unwrap()[class] += 1;
    }
    Ok(ClassDistribution { task, counts })
}

/// Folds quaternary class counts into the classes of `task`.
pub fn merge_counts(quaternary: &[u64], task: Task) -> Vec<u64> {
    let merge = quaternary_merge(task);
    let mut out = vec![0; task.class_count()];
    for (q, &n) in quaternary.iter().enumerate() {
        out[merge[q]] += n;
    }
    out
}

/// Checks that counting under `task` directly agrees with merging the
/// quaternary counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub split: Split,
    pub task: Task,
    pub quaternary: Vec<u64>,
    pub merged: Vec<u64>,
    pub direct: Vec<u64>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.merged == self.direct
    }

    pub fn all(
        assignments: &[SplitAssignment],
        manifest: &[ManifestEntry],
    ) -> Result<Vec<IdentityCheck>> {
        let quaternary = class_distribution(assignments, manifest, Task::Quaternary)?;
        let mut checks = Vec::new();
        for task in [
            Task::BinaryNormalAbnormal,
            Task::BinaryReferable,
            Task::Ternary,
        ] {
            let direct = class_distribution(assignments, manifest, task)?;
            for split in Split::ALL {
                let q = quaternary.split(split).to_vec();
                checks.push(IdentityCheck {
                    split,
                    task,
                    merged: merge_counts(&q, task),
                    quaternary: q,
                    direct: direct.split(split).to_vec(),
                });
            }
        }
        Ok(checks)
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let merge = quaternary_merge(self.task);
        let groups: Vec<String> = (0..self.task.class_count())
            .map(|c| {
                let terms: Vec<String> = (0..4)
                    .filter(|&q| merge[q] == c)
                    .map(|q| self.quaternary[q].to_string())
                    .collect();
                format!("{}={}", terms.join("+"), self.merged[c])
            })
            .collect();
        write!(
            f,
            "{} {} [{}] counted {:?}: {}",
            self.split,
            self.task,
            groups.join(", "),
            self.direct,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DatasetId;

    #[test]
    fn empty_split_is_zero() {
        let d = class_distribution(&[], &[], Task::Ternary).unwrap();
        for s in Split::ALL {
            assert_eq!(d.split(s), &[0, 0, 0]);
        }
    }

    #[test]
    fn dangling_id_errors() {
        let a = [SplitAssignment {
            image_id: "ghost".into(),
            split: Split::Test,
        }];
        assert!(class_distribution(&a, &[], Task::Quaternary).is_err());
    }

    #[test]
    fn merged_table_cells() {
        let eyepacs_test = [24741, 7196, 753, 733];
        assert_eq!(
            merge_counts(&eyepacs_test, Task::BinaryReferable),
            [31937, 1486]
        );
        let messidor_test = [151, 30, 70, 149];
        assert_eq!(
            merge_counts(&messidor_test, Task::BinaryNormalAbnormal),
            [151, 249]
        );
    }

    #[test]
    fn identity_display() {
        let manifest: Vec<ManifestEntry> = (0..5u8)
            .map(|g| ManifestEntry::new(format!("i{g}"), DatasetId::EyePACS, g).unwrap())
            .collect();
        let a: Vec<SplitAssignment> = manifest
            .iter()
            .map(|e| SplitAssignment {
                image_id: e.image_id.clone(),
                split: Split::Test,
            })
            .collect();
        let checks = IdentityCheck::all(&a, &manifest).unwrap();
        assert_eq!(checks.len(), 9);
        assert!(checks.iter().all(IdentityCheck::passed));
        let referable = checks
            .iter()
            .find(|c| c.task == Task::BinaryReferable && c.split == Split::Test)
            .unwrap();
        assert_eq!(
            referable.to_string(),
            "test referable [1+2=3, 1+1=2] counted [3, 2]: PASS"
        );
    }
}

use super::{DatasetId, Task};
use crate::error::{Error, Result};

// Native grade -> task class, indexed by native grade.
const EYEPACS_QUATERNARY: [usize; 5] = [0, 1, 1, 2, 3];
const EYEPACS_TERNARY: [usize; 5] = [0, 1, 1, 2, 2];
const EYEPACS_REFERABLE: [usize; 5] = [0, 0, 0, 1, 1];
const EYEPACS_ABNORMAL: [usize; 5] = [0, 1, 1, 1, 1];
const MESSIDOR_QUATERNARY: [usize; 4] = [0, 1, 2, 3];
const MESSIDOR_TERNARY: [usize; 4] = [0, 1, 2, 2];
const MESSIDOR_REFERABLE: [usize; 4] = [0, 0, 1, 1];
const MESSIDOR_ABNORMAL: [usize; 4] = [0, 1, 1, 1];

/// Dataset-specific mapping from native grade to task class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradeMap {
    pub dataset: DatasetId,
    pub task: Task,
    table: &'static [usize],
}

impl GradeMap {
    pub fn new(dataset: DatasetId, task: Task) -> Self {
        let table: &'static [usize] = match (dataset, task) {
            (DatasetId::EyePACS, Task::Quaternary) => &EYEPACS_QUATERNARY,
            (DatasetId::EyePACS, Task::Ternary) => &EYEPACS_TERNARY,
            (DatasetId::EyePACS, Task::BinaryReferable) => &EYEPACS_REFERABLE,
            (DatasetId::EyePACS, Task::BinaryNormalAbnormal) => &EYEPACS_ABNORMAL,
            (DatasetId::Messidor, Task::Quaternary) => &MESSIDOR_QUATERNARY,
            (DatasetId::Messidor, Task::Ternary) => &MESSIDOR_TERNARY,
            (DatasetId::Messidor, Task::BinaryReferable) => &MESSIDOR_REFERABLE,
            (DatasetId::Messidor, Task::BinaryNormalAbnormal) => &MESSIDOR_ABNORMAL,
        };
        Self {
            dataset,
            task,
            table,
        }
    }

    pub fn class_of(&self, native_grade: i64) -> Result<usize> {
        usize::try_from(native_grade)
            .ok()
            .and_then(|g| self.table.get(g).copied())
            .ok_or_else(|| Error::GradeOutOfRange {
                dataset: self.dataset.to_string(),
                grade: native_grade,
            })
    }

    /// The full table, indexed by native grade.
    pub fn table(&self) -> &'static [usize] {
        self.table
    }
}

pub fn map_grade(dataset: DatasetId, native_grade: i64, task: Task) -> Result<usize> {
    GradeMap::new(dataset, task).class_of(native_grade)
}

/// Quaternary class -> task class. Identical for both datasets, which is
/// what lets the per-task tables be derived from the quaternary one.
pub fn quaternary_merge(task: Task) -> [usize; 4] {
    match task {
        Task::Quaternary => [0, 1, 2, 3],
        Task::Ternary => [0, 1, 2, 2],
        Task::BinaryReferable => [0, 0, 1, 1],
        Task::BinaryNormalAbnormal => [0, 1, 1, 1],
    }
}

//! Confusion matrices, ROC/AUC, operating points and the metrics report.

mod confusion;
mod report;
mod roc;
mod svg;

pub use confusion::{
    accuracy, binary_rates, confusion_matrix, per_class_rates, BinaryRates, ConfusionMatrix,
};
pub use report::{
    binary_metrics, evaluate, multiclass_metrics, ClassRates, MetricsReport, OperatingPointInfo,
};
pub use roc::{
    auc, auc_from_scores, roc_curve, sensitivity_at_specificity, OperatingPoint, RocCurve, RocPoint,
};
pub use svg::roc_svg;

//! Desk-scale softmax baseline and the prediction-file interface through
//! which external models enter the pipeline.

mod features;
mod predictions;
mod softmax;

pub use features::{featurize, FeatureVector};
pub use predictions::{
    load_predictions, read_predictions, write_predictions, write_predictions_to, Coverage,
    LoadedPredictions, PredictionRecord, SIMPLEX_TOLERANCE,
};
pub use softmax::{
    objective, softmax, train_softmax, train_softmax_with, Objective, SoftmaxModel, TrainConfig,
    TrainOutcome,
};

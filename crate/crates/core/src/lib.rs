//! Diabetic-retinopathy grading toolkit: fundus preprocessing, grade
//! harmonization and splits, a softmax baseline, ensemble fusion and
//! evaluation metrics.

pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod fsutil;
pub mod imaging;
pub mod metrics;

pub use error::{Error, Result};

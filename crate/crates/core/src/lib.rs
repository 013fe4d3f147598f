//! Short-text (tweet) binary classification toolkit.
//!
//! The crate covers the full desk-scale workflow for deciding whether a tweet
//! is `INFORMATIVE` or `UNINFORMATIVE`:
//!
//! - [`pipeline`]: tokenization, lowercasing, punctuation filtering, stop-word
//!   removal, and Porter stemming as composable stages.
//! - [`features`]: word n-gram vocabularies, TF-IDF sparse vectors, an optional
//!   character n-gram count channel, and padded index sequences for the CNN.
//! - [`svm`]: an L2-regularized linear SVM trained by stochastic sub-gradient
//!   descent on the hinge loss.
//! - [`forest`]: a random forest of Gini-split decision trees.
//! - [`cnn`]: a small convolutional text classifier with hand-written forward
//!   and backward passes, trained with Adam.
//! - [`eval`]: confusion matrices, accuracy/precision/recall/F1 (overall and
//!   per class), and scoring of externally produced prediction files.
//! - [`data`]: dataset TSV loading, prediction output, and the `TWSF` binary
//!   model-file format that bundles pipeline + vocabulary + parameters.
//!
//! Everything downstream of a seed is deterministic: identical inputs and
//! seeds produce bit-identical models, including under the `parallel` feature
//! (enabled by default), which runs independent work such as forest trees on
//! a rayon pool.

pub mod cnn;
pub mod data;
pub mod eval;
pub mod features;
pub mod forest;
pub mod label;
pub mod pipeline;
pub mod svm;

mod codec;

pub use label::Label;

use thiserror::Error;

/// Errors raised by model training and prediction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("training data is empty")]
    EmptyDataset,
    #[error("feature matrix has {features} rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("training data contains a single class only")]
    SingleClass,
    #[error("dimension mismatch: model expects {expected}, input has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
}

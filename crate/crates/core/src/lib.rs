//! Fairness auditing and bias mitigation for tabular binary classification.
//!
//! The crate is `no_std` (it needs `alloc`) and carries every algorithmic piece
//! of the pipeline: record encoding, disparate-impact auditing, reweighing,
//! weight-aware logistic regression and Newton-boosted trees, calibrated
//! equalized-odds mixing, and the orchestration that ties them together.
//! File formats, configuration parsing and the command line live in the
//! `fairpipe` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod error;
pub mod fairness;
pub mod learners;
pub mod math;
pub mod matrix;
pub mod pipeline;
pub mod posthoc;
pub mod reweigh;

pub use dataset::{EncodeConfig, EncodedDataset, GroupSpec, Predicate, ProtectedColumn, RecordTable};
pub use error::{Error, Result};
pub use fairness::{AuditReport, FairnessReport, GroupConfusion};
pub use learners::{GbmHyper, GbmModel, LinearModel, LogisticHyper, Model};
pub use matrix::FeatureMatrix;
pub use pipeline::{PipelineConfig, PipelineReport, Verdict};
pub use posthoc::{CostKind, EqOddsMixer};
pub use reweigh::ReweighingWeights;

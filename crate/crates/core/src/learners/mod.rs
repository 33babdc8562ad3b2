//! Weight-aware binary classifiers.

mod gbm;
mod logistic;
mod tree;

pub use gbm::{split_gain, train_gbm, weighted_log_loss, GbmHyper, GbmModel};
pub use logistic::{train_logistic, LinearModel, LogisticHyper, LogisticObjective, Standardization};
pub use tree::{Node, Tree};

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::Result;
use crate::matrix::FeatureMatrix;

/// A trained model of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Logistic(LinearModel),
    Gbm(GbmModel),
}

impl Model {
    /// Per-row probability of label 1.
    pub fn predict_scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            Model::Logistic(m) => m.predict_scores(x),
            Model::Gbm(m) => m.predict_scores(x),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Logistic(m) => m.coefficients.len(),
            Model::Gbm(m) => m.n_features,
        }
    }

    /// Weighted training loss after the last iteration/round.
    pub fn final_loss(&self) -> f64 {
        match self {
            Model::Logistic(m) => m.final_loss,
            Model::Gbm(m) => m.round_losses.last().copied().unwrap_or(f64::NAN),
        }
    }
}

/// Learner family and hyperparameters, as written in the pipeline config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    Logistic {
        name: String,
        #[serde(default)]
        hyper: LogisticHyper,
    },
    Gbm {
        name: String,
        #[serde(default)]
        hyper: GbmHyper,
    },
}

impl LearnerSpec {
    pub fn name(&self) -> &str {
        match self {
            LearnerSpec::Logistic { name, .. } | LearnerSpec::Gbm { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LearnerSpec::Logistic { .. } => "logistic",
            LearnerSpec::Gbm { .. } => "gbm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::Logistic { hyper, .. } => hyper.validate(),
            LearnerSpec::Gbm { hyper, .. } => hyper.validate(),
        }
    }

    pub fn train(&self, data: &EncodedDataset) -> Result<Model> {
        match self {
            LearnerSpec::Logistic { hyper, .. } => train_logistic(data, hyper).map(Model::Logistic),
            LearnerSpec::Gbm { hyper, .. } => train_gbm(data, hyper).map(Model::Gbm),
        }
    }
}

/// `1` where `score >= threshold`.
pub fn classify(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= threshold)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn classify_boundary_inclusive() {
        assert_eq!(classify(&[0.4, 0.5, 0.6], 0.5), vec![0, 1, 1]);
        assert_eq!(classify(&[0.0, 0.3, 1.0], 0.0), vec![1, 1, 1]);
        assert_eq!(classify(&[0.999_999, 1.0], 1.0), vec![0, 1]);
    }
}

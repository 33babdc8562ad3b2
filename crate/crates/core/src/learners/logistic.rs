//! L2-regularized logistic regression fit by full-batch gradient descent.
//!
//! Features are standardized with train-set mean and standard deviation; the
//! coefficients live in that standardized space. The standardized matrix is
//! never materialized: margins and gradients are folded through the sparse
//! columns using `(x - mean) / scale`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::math::{sigmoid, softplus};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticHyper {
    pub l2: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        Self { l2: 1e-4, learning_rate: 0.1, max_iters: 500, tol: 1e-6 }
    }
}

impl LogisticHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidHyper("l2 must be >= 0"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidHyper("learning_rate must be > 0"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidHyper("tol must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    /// Population mean/std per column; constant columns get scale 1.
    pub fn fit(x: &FeatureMatrix) -> Self {
        let n = x.n_rows().max(1) as f64;
        let mut means = Vec::with_capacity(x.n_cols());
        let mut scales = Vec::with_capacity(x.n_cols());
        for col in x.columns() {
            let mean = col.values().iter().sum::<f64>() / n;
            let zeros = (x.n_rows() - col.nnz()) as f64;
            let ss = col.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() + zeros * mean * mean;
            let sd = libm::sqrt(ss / n);
            means.push(mean);
            scales.push(if sd > 1e-12 { sd } else { 1.0 });
        }
        Self { means, scales }
    }

    pub fn identity(n_features: usize) -> Self {
        Self { means: vec![0.0; n_features], scales: vec![1.0; n_features] }
    }
}

/// Weighted penalized negative log-likelihood over standardized features:
/// `L = Σ w_i [softplus(z_i) - y_i z_i] + (l2/2)‖β‖²`, `z_i = β·x̃_i + b`.
#[derive(Debug, Clone, Copy)]
pub struct LogisticObjective<'a> {
    pub x: &'a FeatureMatrix,
    pub y: &'a [u8],
    pub w: &'a [f64],
    pub l2: f64,
    pub standardization: &'a Standardization,
}

impl LogisticObjective<'_> {
    pub fn margins(&self, coef: &[f64], intercept: f64) -> Vec<f64> {
        let s = self.standardization;
        let mut offset = intercept;
        for j in 0..coef.len() {
            offset -= coef[j] * s.means[j] / s.scales[j];
        }
        let mut z = vec![offset; self.x.n_rows()];
        for (j, col) in self.x.columns().iter().enumerate() {
            let a = coef[j] / s.scales[j];
            if a == 0.0 {
                continue;
            }
            for (r, v) in col.iter() {
                z[r] += a * v;
            }
        }
        z
    }

    fn loss_from_margins(&self, z: &[f64], coef: &[f64]) -> f64 {
        let data: f64 = z
            .iter()
            .zip(self.y)
            .zip(self.w)
            .map(|((&z, &y), &w)| w * (softplus(z) - f64::from(y) * z))
            .sum();
        data + 0.5 * self.l2 * coef.iter().map(|b| b * b).sum::<f64>()
    }

    fn gradient_from_margins(&self, z: &[f64], coef: &[f64]) -> (Vec<f64>, f64) {
        let s = self.standardization;
        let r: Vec<f64> = z.iter().zip(self.y).zip(self.w).map(|((&z, &y), &w)| w * (sigmoid(z) - f64::from(y))).collect();
        let total: f64 = r.iter().sum();
        let grad = self
            .x
            .columns()
            .iter()
            .enumerate()
            .map(|(j, col)| {
                let dot: f64 = col.iter().map(|(i, v)| r[i] * v).sum();
                (dot - s.means[j] * total) / s.scales[j] + self.l2 * coef[j]
            })
            .collect();
        (grad, total)
    }

    pub fn loss(&self, coef: &[f64], intercept: f64) -> f64 {
        self.loss_from_margins(&self.margins(coef, intercept), coef)
    }

    /// Analytic gradient `(∂L/∂β, ∂L/∂b)`.
    pub fn gradient(&self, coef: &[f64], intercept: f64) -> (Vec<f64>, f64) {
        self.gradient_from_margins(&self.margins(coef, intercept), coef)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub standardization: Standardization,
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
}

impl LinearModel {
    pub fn predict_scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.coefficients.len() {
            return Err(Error::DimensionMismatch { expected: self.coefficients.len(), found: x.n_cols() });
        }
        let w = vec![1.0; x.n_rows()];
        let obj = LogisticObjective { x, y: &[], w: &w, l2: 0.0, standardization: &self.standardization };
        Ok(obj.margins(&self.coefficients, self.intercept).into_iter().map(sigmoid).collect())
    }
}

/// Gradient descent on the weighted objective.
///
/// Each step moves by `learning_rate * ∇L / Σw`, which has the same fixed
/// points as `∇L` but a step size independent of the row count. Iteration
/// stops once `‖∇L‖∞ / Σw < tol`.
pub fn train_logistic(data: &EncodedDataset, hyper: &LogisticHyper) -> Result<LinearModel> {
    hyper.validate()?;
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if data.labels.iter().all(|&y| y == data.labels[0]) {
        return Err(Error::SingleClass);
    }
    if let Some((row, feature)) = data.features.first_non_finite() {
        return Err(Error::NonFiniteFeature { row, feature });
    }
    let standardization = Standardization::fit(&data.features);
    let obj = LogisticObjective {
        x: &data.features,
        y: &data.labels,
        w: &data.weights,
        l2: hyper.l2,
        standardization: &standardization,
    };
    let total_weight: f64 = data.weights.iter().sum();
    let step = hyper.learning_rate / total_weight;

    let mut coef = vec![0.0; data.n_features()];
    let mut intercept = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut loss;
    loop {
        let z = obj.margins(&coef, intercept);
        loss = obj.loss_from_margins(&z, &coef);
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration: iterations });
        }
        let (grad, grad_b) = obj.gradient_from_margins(&z, &coef);
        let norm = grad.iter().fold(libm::fabs(grad_b), |m, g| m.max(libm::fabs(*g)));
        if norm / total_weight < hyper.tol {
            converged = true;
            break;
        }
        if iterations == hyper.max_iters {
            break;
        }
        for (c, g) in coef.iter_mut().zip(&grad) {
            *c -= step * g;
        }
        intercept -= step * grad_b;
        iterations += 1;
    }
    Ok(LinearModel { coefficients: coef, intercept, standardization, iterations, final_loss: loss, converged })
}

//! L2-regularized linear SVM trained by stochastic sub-gradient descent on
//! the hinge loss (Pegasos schedule).
//!
//! Each step t visits one example (shuffled per epoch with the seeded
//! generator) with learning rate `1/(lambda·t)`: the weights shrink by
//! `1 - 1/t` and, on a margin violation `y·(w·x + b) < 1`, gain `η·y·x`.
//! The bias is an un-regularized extra coordinate updated with the same
//! step size. Training is single-threaded and bit-deterministic for a
//! fixed seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::SparseVector;
use crate::label::Label;
use crate::ModelError;

pub const DEFAULT_LAMBDA: f64 = 1e-4;
pub const DEFAULT_EPOCHS: u32 = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    weights: Vec<f64>,
    bias: f64,
    lambda: f64,
    epochs: u32,
    seed: u64,
}

impl LinearSvmModel {
    pub fn from_parts(weights: Vec<f64>, bias: f64, lambda: f64, epochs: u32, seed: u64) -> Self {
        LinearSvmModel { weights, bias, lambda, epochs, seed }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epochs(&self) -> u32 {
        self.epochs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w·x + b`.
    pub fn decision_function(&self, x: &SparseVector) -> Result<f64, ModelError> {
        if x.dim() != self.weights.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.dim(),
            });
        }
        Ok(x.dot_dense(&self.weights) + self.bias)
    }

    /// INFORMATIVE when the decision value is ≥ 0 (documented tie rule).
    pub fn predict(&self, x: &SparseVector) -> Result<Label, ModelError> {
        Ok(Label::from_decision(self.decision_function(x)?))
    }
}

/// Mean hinge loss plus the L2 regularizer, the quantity the training loop
/// descends. Exposed so tests can watch it decrease.
pub fn objective(model: &LinearSvmModel, x: &[SparseVector], y: &[Label]) -> f64 {
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let margin = yi.sign() * (xi.dot_dense(model.weights()) + model.bias());
            (1.0 - margin).max(0.0)
        })
        .sum();
    let reg: f64 = model.weights().iter().map(|w| w * w).sum::<f64>() * model.lambda() / 2.0;
    reg + hinge / x.len() as f64
}

pub fn train_svm(
    x: &[SparseVector],
    y: &[Label],
    lambda: f64,
    epochs: u32,
    seed: u64,
) -> Result<LinearSvmModel, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch { features: x.len(), labels: y.len() });
    }
    if !(lambda > 0.0) {
        return Err(ModelError::InvalidHyperparameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let dim = x[0].dim();
    if let Some(bad) = x.iter().find(|v| v.dim() != dim) {
        return Err(ModelError::DimensionMismatch { expected: dim, got: bad.dim() });
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(ModelError::SingleClass);
    }

    // w is kept as scale * v so the per-step shrink of every coordinate is
    // O(1) instead of O(dim).
    let mut v = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut t: u64 = 1;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = 1.0 / (lambda * t as f64);
            // regularizer step: w *= 1 - eta*lambda = 1 - 1/t
            scale *= 1.0 - 1.0 / t as f64;
            if scale == 0.0 {
                // only at t = 1; reset the representation
                v.iter_mut().for_each(|w| *w = 0.0);
                scale = 1.0;
            }
            let xi = &x[i];
            let yi = y[i].sign();
            let margin = yi * (scale * xi.dot_dense(&v) + bias);
            if margin < 1.0 {
                let step = eta * yi / scale;
                for &(j, value) in xi.entries() {
                    v[j] += step * value;
                }
                bias += eta * yi;
            }
            t += 1;
        }
    }

    let weights = v.iter().map(|&w| w * scale).collect();
    Ok(LinearSvmModel { weights, bias, lambda, epochs, seed })
}

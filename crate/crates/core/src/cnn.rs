//! A small convolutional text classifier with hand-written forward and
//! backward passes: embedding lookup → per-width 1-D valid convolution →
//! ReLU → global max-pool → concatenation → dense layer → softmax, trained
//! with Adam on the mean cross-entropy of shuffled mini-batches.
//!
//! All arithmetic is f64. Row 0 of the embedding (padding) is pinned to
//! zero: its gradient is zeroed before every update, so it never moves.
//! Training is deterministic for a fixed seed; per-example batch gradients
//! may be computed in parallel because they are reduced in a fixed order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::IndexSequence;
use crate::label::Label;
use crate::ModelError;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnConfig {
    pub embed_dim: usize,
    pub filter_widths: Vec<usize>,
    pub filters_per_width: usize,
    pub max_len: usize,
    pub epochs: u32,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            embed_dim: 128,
            filter_widths: vec![3, 4, 5],
            filters_per_width: 100,
            max_len: 143,
            epochs: 25,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 42,
        }
    }
}

impl CnnConfig {
    fn validate(&self) -> Result<(), ModelError> {
        if self.embed_dim == 0 {
            return Err(ModelError::InvalidHyperparameter("embed_dim must be ≥ 1".into()));
        }
        if self.filter_widths.is_empty() {
            return Err(ModelError::InvalidHyperparameter("no filter widths".into()));
        }
        if let Some(&w) = self.filter_widths.iter().find(|&&w| w == 0 || w > self.max_len) {
            return Err(ModelError::InvalidHyperparameter(format!(
                "filter width {w} outside 1..={}",
                self.max_len
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.filters_per_width == 0 {
            return Err(ModelError::InvalidHyperparameter(
                "epochs, batch_size and filters_per_width must be ≥ 1".into(),
            ));
        }
        Ok(())
    }

    fn total_filters(&self) -> usize {
        self.filter_widths.len() * self.filters_per_width
    }
}

/// One convolution width: `filters × (width·embed_dim)` kernels plus biases.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub width: usize,
    pub kernels: Mat,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    embedding: Mat,
    convs: Vec<ConvLayer>,
    dense_w: Mat,
    dense_b: [f64; 2],
    config: CnnConfig,
    vocab_size: usize,
}

/// Xavier-uniform limit `√(6/(fan_in+fan_out))`.
fn xavier_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn fill_uniform(data: &mut [f64], limit: f64, rng: &mut ChaCha8Rng) {
    for v in data {
        *v = (2.0 * rng.random::<f64>() - 1.0) * limit;
    }
}

/// Initializes all weight tensors Xavier-uniform from the seeded generator;
/// biases start at zero and the padding embedding row is zeroed.
pub fn init_cnn(vocab_size: usize, config: &CnnConfig) -> Result<CnnModel, ModelError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(0);
    let d = config.embed_dim;

    let mut embedding = Mat::zeros(vocab_size + 2, d);
    let limit = xavier_limit(vocab_size + 2, d);
    fill_uniform(embedding.data_mut(), limit, &mut rng);
    embedding.row_mut(0).fill(0.0);

    let mut convs = Vec::with_capacity(config.filter_widths.len());
    for &width in &config.filter_widths {
        let mut kernels = Mat::zeros(config.filters_per_width, width * d);
        let limit = xavier_limit(width * d, config.filters_per_width);
        fill_uniform(kernels.data_mut(), limit, &mut rng);
        convs.push(ConvLayer { width, kernels, bias: vec![0.0; config.filters_per_width] });
    }

    let total = config.total_filters();
    let mut dense_w = Mat::zeros(total, 2);
    let limit = xavier_limit(total, 2);
    fill_uniform(dense_w.data_mut(), limit, &mut rng);

    Ok(CnnModel {
        embedding,
        convs,
        dense_w,
        dense_b: [0.0; 2],
        config: config.clone(),
        vocab_size,
    })
}

/// What the backward pass needs from a forward run.
struct ForwardTrace {
    pooled: Vec<f64>,
    /// Per pooled unit: position of the (first) maximal activation.
    argmax: Vec<usize>,
    /// Per pooled unit: whether the maximal pre-activation was positive.
    active: Vec<bool>,
    probs: [f64; 2],
}

impl CnnModel {
    pub fn config(&self) -> &CnnConfig {
        &self.config
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn embedding(&self) -> &Mat {
        &self.embedding
    }

    pub fn convs(&self) -> &[ConvLayer] {
        &self.convs
    }

    pub fn dense_w(&self) -> &Mat {
        &self.dense_w
    }

    pub fn dense_b(&self) -> [f64; 2] {
        self.dense_b
    }

    pub fn from_parts(
        embedding: Mat,
        convs: Vec<ConvLayer>,
        dense_w: Mat,
        dense_b: [f64; 2],
        config: CnnConfig,
        vocab_size: usize,
    ) -> Self {
        CnnModel { embedding, convs, dense_w, dense_b, config, vocab_size }
    }

    pub fn param_count(&self) -> usize {
        self.embedding.rows() * self.embedding.cols()
            + self
                .convs
                .iter()
                .map(|c| c.kernels.rows() * c.kernels.cols() + c.bias.len())
                .sum::<usize>()
            + self.dense_w.rows() * self.dense_w.cols()
            + 2
    }

    fn check_input(&self, x: &IndexSequence) -> Result<(), ModelError> {
        if x.len() != self.config.max_len {
            return Err(ModelError::DimensionMismatch {
                expected: self.config.max_len,
                got: x.len(),
            });
        }
        let limit = (self.vocab_size + 2) as u32;
        if let Some(&bad) = x.indices().iter().find(|&&i| i >= limit) {
            return Err(ModelError::DimensionMismatch {
                expected: limit as usize,
                got: bad as usize,
            });
        }
        Ok(())
    }

    fn forward_trace(&self, x: &IndexSequence) -> ForwardTrace {
        let d = self.config.embed_dim;
        let idx = x.indices();
        let total = self.config.total_filters();
        let mut pooled = vec![0.0; total];
        let mut argmax = vec![0; total];
        let mut active = vec![false; total];

        let mut unit = 0;
        for conv in &self.convs {
            let positions = self.config.max_len - conv.width + 1;
            for f in 0..self.config.filters_per_width {
                let kernel = conv.kernels.row(f);
                let mut best_act = f64::NEG_INFINITY;
                let mut best_pos = 0;
                for p in 0..positions {
                    let mut act = conv.bias[f];
                    for (offset, &row_index) in idx[p..p + conv.width].iter().enumerate() {
                        let emb = self.embedding.row(row_index as usize);
                        let k = &kernel[offset * d..(offset + 1) * d];
                        for e in 0..d {
                            act += k[e] * emb[e];
                        }
                    }
                    if act > best_act {
                        best_act = act;
                        best_pos = p;
                    }
                }
                pooled[unit] = best_act.max(0.0);
                argmax[unit] = best_pos;
                active[unit] = best_act > 0.0;
                unit += 1;
            }
        }

        let mut logits = self.dense_b;
        for (i, &p) in pooled.iter().enumerate() {
            let w = self.dense_w.row(i);
            logits[0] += p * w[0];
            logits[1] += p * w[1];
        }
        let m = logits[0].max(logits[1]);
        let exp = [(logits[0] - m).exp(), (logits[1] - m).exp()];
        let z = exp[0] + exp[1];
        ForwardTrace { pooled, argmax, active, probs: [exp[0] / z, exp[1] / z] }
    }

    /// Class probabilities `(p_informative, p_uninformative)`.
    pub fn forward(&self, x: &IndexSequence) -> Result<[f64; 2], ModelError> {
        self.check_input(x)?;
        Ok(self.forward_trace(x).probs)
    }

    /// Argmax of the forward probabilities; an exact tie is INFORMATIVE.
    pub fn predict(&self, x: &IndexSequence) -> Result<Label, ModelError> {
        let probs = self.forward(x)?;
        Ok(if probs[0] >= probs[1] { Label::Informative } else { Label::Uninformative })
    }

    /// All trainable parameters flattened in a fixed order. The padding
    /// embedding row is pinned at zero and therefore not included.
    pub fn flatten_params(&self) -> Vec<f64> {
        let d = self.config.embed_dim;
        let mut flat = Vec::with_capacity(self.param_count() - d);
        flat.extend_from_slice(&self.embedding.data()[d..]);
        for conv in &self.convs {
            flat.extend_from_slice(conv.kernels.data());
            flat.extend_from_slice(&conv.bias);
        }
        flat.extend_from_slice(self.dense_w.data());
        flat.extend_from_slice(&self.dense_b);
        flat
    }

    /// Inverse of [`CnnModel::flatten_params`].
    pub fn set_params(&mut self, flat: &[f64]) {
        let d = self.config.embed_dim;
        let mut pos = 0;
        let mut take = |n: usize| {
            let slice = &flat[pos..pos + n];
            pos += n;
            slice
        };
        let emb_len = self.embedding.data().len() - d;
        self.embedding.data_mut()[d..].copy_from_slice(take(emb_len));
        for conv in &mut self.convs {
            let len = conv.kernels.data().len();
            conv.kernels.data_mut().copy_from_slice(take(len));
            let blen = conv.bias.len();
            conv.bias.copy_from_slice(take(blen));
        }
        let dlen = self.dense_w.data().len();
        self.dense_w.data_mut().copy_from_slice(take(dlen));
        self.dense_b.copy_from_slice(take(2));
        assert_eq!(pos, flat.len(), "parameter vector length mismatch");
    }
}

/// `−ln(p_gold)`, with the probability clamped at 1e-12.
pub fn loss(probs: [f64; 2], gold: Label) -> f64 {
    -probs[gold.index()].max(1e-12).ln()
}

/// Gradient tensors, same shapes as the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embedding: Mat,
    pub convs: Vec<(Mat, Vec<f64>)>,
    pub dense_w: Mat,
    pub dense_b: [f64; 2],
}

impl Gradients {
    pub fn zeros_like(model: &CnnModel) -> Self {
        Gradients {
            embedding: Mat::zeros(model.embedding.rows(), model.embedding.cols()),
            convs: model
                .convs
                .iter()
                .map(|c| (Mat::zeros(c.kernels.rows(), c.kernels.cols()), vec![0.0; c.bias.len()]))
                .collect(),
            dense_w: Mat::zeros(model.dense_w.rows(), model.dense_w.cols()),
            dense_b: [0.0; 2],
        }
    }

    /// Flattened in the same order as [`CnnModel::flatten_params`]
    /// (padding row excluded).
    pub fn flatten(&self, embed_dim: usize) -> Vec<f64> {
        let mut flat = Vec::new();
        flat.extend_from_slice(&self.embedding.data()[embed_dim..]);
        for (kernels, bias) in &self.convs {
            flat.extend_from_slice(kernels.data());
            flat.extend_from_slice(bias);
        }
        flat.extend_from_slice(self.dense_w.data());
        flat.extend_from_slice(&self.dense_b);
        flat
    }
}

/// Per-example gradient with the embedding part kept sparse (only rows the
/// example touches), so batches can be mapped in parallel cheaply.
struct ExampleGrad {
    convs: Vec<(Mat, Vec<f64>)>,
    dense_w: Mat,
    dense_b: [f64; 2],
    emb_rows: Vec<(u32, Vec<f64>)>,
    loss: f64,
}

fn example_grad(model: &CnnModel, x: &IndexSequence, gold: Label) -> ExampleGrad {
    let d = model.config.embed_dim;
    let idx = x.indices();
    let trace = model.forward_trace(x);
    let example_loss = loss(trace.probs, gold);

    let mut dlogits = trace.probs;
    dlogits[gold.index()] -= 1.0;

    let mut dense_w = Mat::zeros(model.dense_w.rows(), 2);
    let mut dpooled = vec![0.0; trace.pooled.len()];
    for (i, &p) in trace.pooled.iter().enumerate() {
        let gw = dense_w.row_mut(i);
        gw[0] = p * dlogits[0];
        gw[1] = p * dlogits[1];
        let w = model.dense_w.row(i);
        dpooled[i] = w[0] * dlogits[0] + w[1] * dlogits[1];
    }

    let mut convs = Vec::with_capacity(model.convs.len());
    let mut emb_acc: std::collections::HashMap<u32, Vec<f64>> = std::collections::HashMap::new();
    let mut unit = 0;
    for conv in &model.convs {
        let mut dkernels = Mat::zeros(conv.kernels.rows(), conv.kernels.cols());
        let mut dbias = vec![0.0; conv.bias.len()];
        for f in 0..conv.kernels.rows() {
            if trace.active[unit] {
                let dact = dpooled[unit];
                let p = trace.argmax[unit];
                dbias[f] += dact;
                let kernel = conv.kernels.row(f);
                let dkernel = dkernels.row_mut(f);
                for (offset, &row_index) in idx[p..p + conv.width].iter().enumerate() {
                    let emb = model.embedding.row(row_index as usize);
                    let erow = emb_acc.entry(row_index).or_insert_with(|| vec![0.0; d]);
                    for e in 0..d {
                        dkernel[offset * d + e] += dact * emb[e];
                        erow[e] += dact * kernel[offset * d + e];
                    }
                }
            }
            unit += 1;
        }
        convs.push((dkernels, dbias));
    }

    let mut emb_rows: Vec<(u32, Vec<f64>)> = emb_acc.into_iter().collect();
    emb_rows.sort_unstable_by_key(|&(row, _)| row);

    ExampleGrad { convs, dense_w, dense_b: dlogits, emb_rows, loss: example_loss }
}

/// Exact analytic gradient of the mean batch loss, plus that loss.
/// The padding embedding row is zeroed before returning.
pub fn backward(
    model: &CnnModel,
    batch: &[(IndexSequence, Label)],
) -> Result<(Gradients, f64), ModelError> {
    if batch.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    for (x, _) in batch {
        model.check_input(x)?;
    }

    // Map per example, then fold in batch order: the fixed reduction order
    // keeps results identical with and without the parallel feature.
    #[cfg(feature = "parallel")]
    let examples: Vec<ExampleGrad> =
        batch.par_iter().map(|(x, y)| example_grad(model, x, *y)).collect();
    #[cfg(not(feature = "parallel"))]
    let examples: Vec<ExampleGrad> =
        batch.iter().map(|(x, y)| example_grad(model, x, *y)).collect();

    let mut grads = Gradients::zeros_like(model);
    let mut total_loss = 0.0;
    for eg in &examples {
        total_loss += eg.loss;
        for ((gk, gb), (ek, eb)) in grads.convs.iter_mut().zip(&eg.convs) {
            for (g, e) in gk.data_mut().iter_mut().zip(ek.data()) {
                *g += e;
            }
            for (g, e) in gb.iter_mut().zip(eb) {
                *g += e;
            }
        }
        for (g, e) in grads.dense_w.data_mut().iter_mut().zip(eg.dense_w.data()) {
            *g += e;
        }
        grads.dense_b[0] += eg.dense_b[0];
        grads.dense_b[1] += eg.dense_b[1];
        for (row, values) in &eg.emb_rows {
            for (g, e) in grads.embedding.row_mut(*row as usize).iter_mut().zip(values) {
                *g += e;
            }
        }
    }

    let scale = 1.0 / batch.len() as f64;
    for (_, ref mut gb) in &mut grads.convs {
        gb.iter_mut().for_each(|g| *g *= scale);
    }
    for (gk, _) in &mut grads.convs {
        gk.data_mut().iter_mut().for_each(|g| *g *= scale);
    }
    grads.dense_w.data_mut().iter_mut().for_each(|g| *g *= scale);
    grads.dense_b[0] *= scale;
    grads.dense_b[1] *= scale;
    grads.embedding.data_mut().iter_mut().for_each(|g| *g *= scale);
    grads.embedding.row_mut(0).fill(0.0);

    Ok((grads, total_loss * scale))
}

/// First/second moment accumulators, one per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Gradients,
    v: Gradients,
    t: u64,
}

impl AdamState {
    pub fn new(model: &CnnModel) -> Self {
        AdamState { m: Gradients::zeros_like(model), v: Gradients::zeros_like(model), t: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
) {
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// One bias-corrected Adam update:
/// `m ← β₁m + (1−β₁)g`, `v ← β₂v + (1−β₂)g²`,
/// `θ ← θ − lr · (m/(1−β₁ᵗ)) / (√(v/(1−β₂ᵗ)) + eps)`.
pub fn adam_step(
    model: &mut CnnModel,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    state.t += 1;
    let t = state.t;
    adam_update(
        model.embedding.data_mut(),
        grads.embedding.data(),
        state.m.embedding.data_mut(),
        state.v.embedding.data_mut(),
        lr,
        beta1,
        beta2,
        eps,
        t,
    );
    for (((conv, (gk, gb)), (mk, mb)), (vk, vb)) in model
        .convs
        .iter_mut()
        .zip(&grads.convs)
        .zip(state.m.convs.iter_mut())
        .zip(state.v.convs.iter_mut())
    {
        adam_update(
            conv.kernels.data_mut(),
            gk.data(),
            mk.data_mut(),
            vk.data_mut(),
            lr,
            beta1,
            beta2,
            eps,
            t,
        );
        adam_update(&mut conv.bias, gb, mb, vb, lr, beta1, beta2, eps, t);
    }
    adam_update(
        model.dense_w.data_mut(),
        grads.dense_w.data(),
        state.m.dense_w.data_mut(),
        state.v.dense_w.data_mut(),
        lr,
        beta1,
        beta2,
        eps,
        t,
    );
    adam_update(
        &mut model.dense_b,
        &grads.dense_b,
        &mut state.m.dense_b,
        &mut state.v.dense_b,
        lr,
        beta1,
        beta2,
        eps,
        t,
    );
}

/// A trained model plus the recorded per-epoch mean training loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedCnn {
    pub model: CnnModel,
    pub epoch_losses: Vec<f64>,
}

/// Trains for `config.epochs` passes over seeded-shuffled mini-batches.
pub fn train_cnn(
    data: &[(IndexSequence, Label)],
    vocab_size: usize,
    config: &CnnConfig,
) -> Result<TrainedCnn, ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if data.iter().all(|(_, y)| *y == data[0].1) {
        return Err(ModelError::SingleClass);
    }
    let mut model = init_cnn(vocab_size, config)?;
    for (x, _) in data {
        model.check_input(x)?;
    }
    let mut state = AdamState::new(&model);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(1);

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch: Vec<(IndexSequence, Label)> = Vec::with_capacity(config.batch_size);
    let mut epoch_losses = Vec::with_capacity(config.epochs as usize);
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            let (grads, batch_loss) = backward(&model, &batch)?;
            epoch_loss += batch_loss * batch.len() as f64;
            adam_step(
                &mut model,
                &grads,
                &mut state,
                config.learning_rate,
                config.beta1,
                config.beta2,
                config.eps,
            );
        }
        epoch_losses.push(epoch_loss / data.len() as f64);
    }
    Ok(TrainedCnn { model, epoch_losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::IndexSequence;

    fn tiny_config() -> CnnConfig {
        CnnConfig {
            embed_dim: 4,
            filter_widths: vec![2],
            filters_per_width: 3,
            max_len: 5,
            epochs: 25,
            batch_size: 4,
            learning_rate: 1e-2,
            seed: 7,
            ..Default::default()
        }
    }

    fn ix(indices: &[u32]) -> IndexSequence {
        IndexSequence::from_indices(indices.to_vec())
    }

    #[test]
    fn init_is_deterministic_and_pads_zero() {
        let a = init_cnn(10, &tiny_config()).unwrap();
        let b = init_cnn(10, &tiny_config()).unwrap();
        assert_eq!(a, b);
        assert!(a.embedding().row(0).iter().all(|&v| v == 0.0));
        let mut other = tiny_config();
        other.seed = 8;
        assert_ne!(init_cnn(10, &other).unwrap(), a);
    }

    #[test]
    fn param_count_matches_shape_arithmetic() {
        let model = init_cnn(100, &CnnConfig::default()).unwrap();
        assert_eq!(model.param_count(), 167_558);
    }

    #[test]
    fn forward_is_a_distribution() {
        let model = init_cnn(10, &tiny_config()).unwrap();
        let probs = model.forward(&ix(&[2, 3, 4, 0, 0])).unwrap();
        assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
        assert!(probs[0] > 0.0 && probs[1] > 0.0);
    }

    #[test]
    fn all_padding_input_yields_softmax_of_dense_bias() {
        let mut model = init_cnn(10, &tiny_config()).unwrap();
        // conv biases are zero after init; zero the dense layer too
        model.dense_w.data_mut().fill(0.0);
        model.dense_b = [0.3, -0.2];
        let probs = model.forward(&ix(&[0, 0, 0, 0, 0])).unwrap();
        let z = (0.3f64).exp() + (-0.2f64).exp();
        assert!((probs[0] - (0.3f64).exp() / z).abs() < 1e-12);
        assert!((probs[1] - (-0.2f64).exp() / z).abs() < 1e-12);
    }

    #[test]
    fn zero_dense_layer_gives_uniform_probs() {
        let mut model = init_cnn(10, &tiny_config()).unwrap();
        model.dense_w.data_mut().fill(0.0);
        model.dense_b = [0.0, 0.0];
        let probs = model.forward(&ix(&[2, 5, 7, 1, 0])).unwrap();
        assert_eq!(probs, [0.5, 0.5]);
    }

    #[test]
    fn loss_examples() {
        assert!((loss([0.5, 0.5], Label::Informative) - 2.0f64.ln()).abs() < 1e-12);
        assert_eq!(loss([1.0, 0.0], Label::Informative), 0.0);
        let p = (-2.0f64).exp();
        assert!((loss([p, 1.0 - p], Label::Informative) - 2.0).abs() < 1e-12);
        // clamped rather than infinite
        assert!(loss([0.0, 1.0], Label::Informative).is_finite());
    }

    #[test]
    fn symmetric_batch_has_zero_dense_bias_gradient() {
        let mut model = init_cnn(10, &tiny_config()).unwrap();
        model.dense_w.data_mut().fill(0.0);
        model.dense_b = [0.0, 0.0];
        let batch = vec![
            (ix(&[2, 3, 0, 0, 0]), Label::Informative),
            (ix(&[2, 3, 0, 0, 0]), Label::Uninformative),
        ];
        let (grads, _) = backward(&model, &batch).unwrap();
        assert!(grads.dense_b[0].abs() < 1e-15);
        assert!(grads.dense_b[1].abs() < 1e-15);
    }

    #[test]
    fn duplicating_the_batch_keeps_the_mean_gradient() {
        let model = init_cnn(10, &tiny_config()).unwrap();
        let batch = vec![
            (ix(&[2, 3, 4, 0, 0]), Label::Informative),
            (ix(&[5, 6, 0, 0, 0]), Label::Uninformative),
        ];
        let mut doubled = batch.clone();
        doubled.extend(batch.clone());
        let (g1, l1) = backward(&model, &batch).unwrap();
        let (g2, l2) = backward(&model, &doubled).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        let f1 = g1.flatten(model.config().embed_dim);
        let f2 = g2.flatten(model.config().embed_dim);
        for (a, b) in f1.iter().zip(&f2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn padding_row_gradient_is_zeroed() {
        let model = init_cnn(10, &tiny_config()).unwrap();
        let batch = vec![(ix(&[2, 0, 0, 0, 0]), Label::Informative)];
        let (grads, _) = backward(&model, &batch).unwrap();
        assert!(grads.embedding.row(0).iter().all(|&g| g == 0.0));
        // the unknown row (1) is a real parameter and may receive gradient
    }

    #[test]
    fn adam_zero_gradient_keeps_parameters() {
        let mut model = init_cnn(10, &tiny_config()).unwrap();
        let before = model.clone();
        let grads = Gradients::zeros_like(&model);
        let mut state = AdamState::new(&model);
        adam_step(&mut model, &grads, &mut state, 1e-3, 0.9, 0.999, 1e-8, );
        assert_eq!(model, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn adam_first_step_magnitude() {
        // single scalar parameter view: first step should be ≈ lr for g ≠ 0
        let mut params = [1.0];
        let mut m = [0.0];
        let mut v = [0.0];
        let g = [0.37];
        adam_update(&mut params, &g, &mut m, &mut v, 1e-3, 0.9, 0.999, 1e-8, 1);
        let expected = 1.0 - 1e-3 * 0.37 / (0.37 + 1e-8);
        assert!((params[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn adam_matches_scalar_reference_trace() {
        // independent scalar Adam, computed step by step
        let (lr, b1, b2, eps): (f64, f64, f64, f64) = (0.01, 0.9, 0.999, 1e-8);
        let gs = [0.5, -0.25, 0.125];
        let mut theta_ref = 0.3;
        let (mut m_ref, mut v_ref) = (0.0, 0.0);
        for (i, &g) in gs.iter().enumerate() {
            let t = (i + 1) as i32;
            m_ref = b1 * m_ref + (1.0 - b1) * g;
            v_ref = b2 * v_ref + (1.0 - b2) * g * g;
            let mh = m_ref / (1.0 - b1.powi(t));
            let vh: f64 = v_ref / (1.0 - b2.powi(t));
            theta_ref -= lr * mh / (vh.sqrt() + eps);
        }

        let mut params = [0.3];
        let mut m = [0.0];
        let mut v = [0.0];
        for (i, &g) in gs.iter().enumerate() {
            adam_update(&mut params, &[g], &mut m, &mut v, lr, b1, b2, eps, (i + 1) as u64);
        }
        assert!((params[0] - theta_ref).abs() < 1e-12);
    }

    #[test]
    fn training_fits_a_marker_token_task() {
        // class decided by the presence of token index 2
        let mut data = Vec::new();
        for i in 0..20u32 {
            data.push((ix(&[2, 3 + (i % 5), 0, 0, 0]), Label::Informative));
            data.push((ix(&[8 + (i % 3), 4, 0, 0, 0]), Label::Uninformative));
        }
        let trained = train_cnn(&data, 12, &tiny_config()).unwrap();
        let correct = data
            .iter()
            .filter(|(x, y)| trained.model.predict(x).unwrap() == *y)
            .count();
        assert_eq!(correct, data.len(), "marker task must reach 100% training accuracy");
        assert!(trained.epoch_losses.last().unwrap() < &trained.epoch_losses[0]);
    }

    #[test]
    fn training_is_deterministic() {
        let data = vec![
            (ix(&[2, 3, 0, 0, 0]), Label::Informative),
            (ix(&[4, 5, 0, 0, 0]), Label::Uninformative),
            (ix(&[2, 5, 0, 0, 0]), Label::Informative),
            (ix(&[4, 3, 0, 0, 0]), Label::Uninformative),
        ];
        let mut config = tiny_config();
        config.epochs = 3;
        let a = train_cnn(&data, 10, &config).unwrap();
        let b = train_cnn(&data, 10, &config).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.epoch_losses, b.epoch_losses);
    }

    #[test]
    fn single_class_is_an_error() {
        let data = vec![
            (ix(&[2, 0, 0, 0, 0]), Label::Informative),
            (ix(&[3, 0, 0, 0, 0]), Label::Informative),
        ];
        assert_eq!(train_cnn(&data, 10, &tiny_config()).unwrap_err(), ModelError::SingleClass);
    }

    #[test]
    fn wrong_length_input_is_an_error() {
        let model = init_cnn(10, &tiny_config()).unwrap();
        assert!(matches!(
            model.forward(&ix(&[2, 3])),
            Err(ModelError::DimensionMismatch { expected: 5, got: 2 })
        ));
    }

    #[test]
    fn padding_row_survives_training_at_zero() {
        let data = vec![
            (ix(&[2, 3, 0, 0, 0]), Label::Informative),
            (ix(&[4, 5, 0, 0, 0]), Label::Uninformative),
        ];
        let mut config = tiny_config();
        config.epochs = 10;
        let trained = train_cnn(&data, 10, &config).unwrap();
        assert!(trained.model.embedding().row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flatten_set_round_trip() {
        let model = init_cnn(10, &tiny_config()).unwrap();
        let flat = model.flatten_params();
        let mut other = model.clone();
        let doubled: Vec<f64> = flat.iter().map(|v| v * 2.0).collect();
        other.set_params(&doubled);
        assert_ne!(other, model);
        other.set_params(&flat);
        assert_eq!(other, model);
    }
}

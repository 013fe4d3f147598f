//! The `TWSF` model-file format.
//!
//! Layout: magic `TWSF`, a little-endian u16 version, a model-type tag
//! (1 = svm, 2 = forest, 3 = cnn), then three length-prefixed sections:
//! the pipeline configuration snapshot, the vocabulary, and the model
//! payload. Serialization is canonical — save → load → save reproduces
//! identical bytes — and a model file carries everything prediction needs.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::cnn::{CnnConfig, CnnModel, ConvLayer, Mat};
use crate::codec::{self, Reader};
use crate::features::{encode_sequence, FeatureSpace, TfIdfModel, Vocabulary};
use crate::forest::{RandomForestModel, TreeNode};
use crate::label::Label;
use crate::pipeline::{run_pipeline, PipelineConfig, StopwordList};
use crate::svm::LinearSvmModel;

pub const MAGIC: [u8; 4] = *b"TWSF";
pub const VERSION: u16 = 1;

const TAG_SVM: u8 = 1;
const TAG_FOREST: u8 = 2;
const TAG_CNN: u8 = 3;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model-file version {0}")]
    UnsupportedVersion(u16),
    #[error("model file is truncated")]
    Truncated,
    #[error("unknown model type tag {0}")]
    UnknownModelTag(u8),
    #[error("malformed model file: {0}")]
    Malformed(String),
}

/// Tagged union over the three trained-model payloads.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Svm { features: FeatureSpace, model: LinearSvmModel },
    Forest { features: FeatureSpace, model: RandomForestModel },
    Cnn { vocab: Vocabulary, model: CnnModel },
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Svm { .. } => "svm",
            TrainedModel::Forest { .. } => "rf",
            TrainedModel::Cnn { .. } => "cnn",
        }
    }
}

/// A trained model plus the exact pipeline and vocabulary it was fitted
/// with, so prediction needs only this file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub pipeline: PipelineConfig,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(&MAGIC);
        codec::put_u16(&mut buf, VERSION);
        let tag = match &self.model {
            TrainedModel::Svm { .. } => TAG_SVM,
            TrainedModel::Forest { .. } => TAG_FOREST,
            TrainedModel::Cnn { .. } => TAG_CNN,
        };
        codec::put_u8(&mut buf, tag);

        let mut section = Vec::new();
        write_pipeline(&mut section, &self.pipeline);
        put_section(&mut buf, &section);

        section.clear();
        let vocab = match &self.model {
            TrainedModel::Svm { features, .. } | TrainedModel::Forest { features, .. } => {
                features.tfidf().vocab()
            }
            TrainedModel::Cnn { vocab, .. } => vocab,
        };
        write_vocab(&mut section, vocab);
        put_section(&mut buf, &section);

        section.clear();
        match &self.model {
            TrainedModel::Svm { features, model } => {
                write_feature_extras(&mut section, features);
                write_svm(&mut section, model);
            }
            TrainedModel::Forest { features, model } => {
                write_feature_extras(&mut section, features);
                write_forest(&mut section, model);
            }
            TrainedModel::Cnn { model, .. } => write_cnn(&mut section, model),
        }
        put_section(&mut buf, &section);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelFileError> {
        let mut r = Reader::new(bytes);
        let mut magic = [0u8; 4];
        for b in &mut magic {
            *b = r.u8()?;
        }
        if magic != MAGIC {
            return Err(ModelFileError::BadMagic);
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(ModelFileError::UnsupportedVersion(version));
        }
        let tag = r.u8()?;

        let section = take_section(&mut r)?;
        let pipeline = read_pipeline(&mut Reader::new(&section))?;

        let section = take_section(&mut r)?;
        let vocab = read_vocab(&mut Reader::new(&section))?;

        let section = take_section(&mut r)?;
        let mut pr = Reader::new(&section);
        let model = match tag {
            TAG_SVM => {
                let features = read_feature_space(&mut pr, vocab)?;
                let model = read_svm(&mut pr)?;
                if model.dim() != features.dim() {
                    return Err(ModelFileError::Malformed(format!(
                        "svm dimension {} does not match feature space {}",
                        model.dim(),
                        features.dim()
                    )));
                }
                TrainedModel::Svm { features, model }
            }
            TAG_FOREST => {
                let features = read_feature_space(&mut pr, vocab)?;
                let model = read_forest(&mut pr)?;
                if model.dim() != features.dim() {
                    return Err(ModelFileError::Malformed(format!(
                        "forest dimension {} does not match feature space {}",
                        model.dim(),
                        features.dim()
                    )));
                }
                TrainedModel::Forest { features, model }
            }
            TAG_CNN => {
                let model = read_cnn(&mut pr)?;
                if model.vocab_size() != vocab.len() {
                    return Err(ModelFileError::Malformed(format!(
                        "cnn vocab size {} does not match vocabulary {}",
                        model.vocab_size(),
                        vocab.len()
                    )));
                }
                TrainedModel::Cnn { vocab, model }
            }
            other => return Err(ModelFileError::UnknownModelTag(other)),
        };
        if !pr.is_at_end() || !r.is_at_end() {
            return Err(ModelFileError::Malformed("trailing bytes".into()));
        }
        Ok(ModelFile { pipeline, model })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|source| ModelFileError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelFileError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| ModelFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    /// Applies the stored pipeline, feature space and model to raw text.
    pub fn predict_text(&self, text: &str) -> Label {
        let tokens = run_pipeline(text, &self.pipeline);
        match &self.model {
            TrainedModel::Svm { features, model } => model
                .predict(&features.transform(&tokens))
                .expect("stored dimensions are consistent"),
            TrainedModel::Forest { features, model } => model
                .predict(&features.transform(&tokens))
                .expect("stored dimensions are consistent"),
            TrainedModel::Cnn { vocab, model } => {
                let encoded = encode_sequence(&tokens, vocab, model.config().max_len);
                model.predict(&encoded).expect("stored dimensions are consistent")
            }
        }
    }
}

fn put_section(buf: &mut Vec<u8>, section: &[u8]) {
    codec::put_usize(buf, section.len());
    buf.extend_from_slice(section);
}

fn take_section(r: &mut Reader<'_>) -> Result<Vec<u8>, ModelFileError> {
    let len = r.usize()?;
    let mut out = Vec::with_capacity(len.min(1 << 20));
    for _ in 0..len {
        out.push(r.u8()?);
    }
    Ok(out)
}

fn write_pipeline(buf: &mut Vec<u8>, config: &PipelineConfig) {
    codec::put_bool(buf, config.lowercase);
    codec::put_bool(buf, config.strip_punctuation);
    codec::put_bool(buf, config.remove_stopwords);
    codec::put_bool(buf, config.stem);
    codec::put_u32(buf, config.stopwords.len() as u32);
    for word in config.stopwords.iter() {
        codec::put_str(buf, word);
    }
}

fn read_pipeline(r: &mut Reader<'_>) -> Result<PipelineConfig, ModelFileError> {
    let lowercase = r.bool()?;
    let strip_punctuation = r.bool()?;
    let remove_stopwords = r.bool()?;
    let stem = r.bool()?;
    let count = r.u32()?;
    let mut words = Vec::with_capacity(count as usize);
    for _ in 0..count {
        words.push(r.str()?);
    }
    Ok(PipelineConfig {
        lowercase,
        strip_punctuation,
        remove_stopwords,
        stem,
        stopwords: StopwordList::from_words(words),
    })
}

fn write_vocab(buf: &mut Vec<u8>, vocab: &Vocabulary) {
    let (nmin, nmax) = vocab.ngram_range();
    codec::put_usize(buf, nmin);
    codec::put_usize(buf, nmax);
    codec::put_usize(buf, vocab.corpus_size());
    codec::put_usize(buf, vocab.len());
    for (term, &df) in vocab.terms().iter().zip(vocab.document_frequencies()) {
        codec::put_str(buf, term);
        codec::put_u32(buf, df);
    }
}

fn read_vocab(r: &mut Reader<'_>) -> Result<Vocabulary, ModelFileError> {
    let nmin = r.usize()?;
    let nmax = r.usize()?;
    let corpus_size = r.usize()?;
    let count = r.usize()?;
    let mut terms = Vec::with_capacity(count.min(1 << 20));
    let mut frequencies = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        terms.push(r.str()?);
        frequencies.push(r.u32()?);
    }
    if terms.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ModelFileError::Malformed("vocabulary terms are not sorted".into()));
    }
    Ok(Vocabulary::from_parts(terms, frequencies, nmin, nmax, corpus_size))
}

fn write_feature_extras(buf: &mut Vec<u8>, features: &FeatureSpace) {
    codec::put_f64_slice(buf, features.tfidf().idf());
    codec::put_bool(buf, features.tfidf().l2_normalize());
    match features.char_vocab() {
        None => codec::put_bool(buf, false),
        Some(vocab) => {
            codec::put_bool(buf, true);
            write_vocab(buf, vocab);
        }
    }
}

fn read_feature_space(
    r: &mut Reader<'_>,
    vocab: Vocabulary,
) -> Result<FeatureSpace, ModelFileError> {
    let idf = r.f64_vec()?;
    if idf.len() != vocab.len() {
        return Err(ModelFileError::Malformed("idf length does not match vocabulary".into()));
    }
    let l2 = r.bool()?;
    let char_vocab = if r.bool()? { Some(read_vocab(r)?) } else { None };
    Ok(FeatureSpace::from_parts(TfIdfModel::from_parts(vocab, idf, l2), char_vocab))
}

fn write_svm(buf: &mut Vec<u8>, model: &LinearSvmModel) {
    codec::put_f64_slice(buf, model.weights());
    codec::put_f64(buf, model.bias());
    codec::put_f64(buf, model.lambda());
    codec::put_u32(buf, model.epochs());
    codec::put_u64(buf, model.seed());
}

fn read_svm(r: &mut Reader<'_>) -> Result<LinearSvmModel, ModelFileError> {
    let weights = r.f64_vec()?;
    let bias = r.f64()?;
    let lambda = r.f64()?;
    let epochs = r.u32()?;
    let seed = r.u64()?;
    Ok(LinearSvmModel::from_parts(weights, bias, lambda, epochs, seed))
}

/// Pre-order node encoding with explicit leaf tags.
fn write_tree(buf: &mut Vec<u8>, node: &TreeNode) {
    match node {
        TreeNode::Leaf { counts } => {
            codec::put_u8(buf, 0);
            codec::put_u32(buf, counts[0]);
            codec::put_u32(buf, counts[1]);
        }
        TreeNode::Internal { feature, threshold, left, right } => {
            codec::put_u8(buf, 1);
            codec::put_usize(buf, *feature);
            codec::put_f64(buf, *threshold);
            write_tree(buf, left);
            write_tree(buf, right);
        }
    }
}

fn read_tree(r: &mut Reader<'_>) -> Result<TreeNode, ModelFileError> {
    match r.u8()? {
        0 => {
            let a = r.u32()?;
            let b = r.u32()?;
            Ok(TreeNode::Leaf { counts: [a, b] })
        }
        1 => {
            let feature = r.usize()?;
            let threshold = r.f64()?;
            let left = read_tree(r)?;
            let right = read_tree(r)?;
            Ok(TreeNode::Internal {
                feature,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
        other => Err(ModelFileError::Malformed(format!("unknown tree node tag {other}"))),
    }
}

fn write_forest(buf: &mut Vec<u8>, model: &RandomForestModel) {
    codec::put_usize(buf, model.max_depth());
    codec::put_usize(buf, model.min_leaf());
    codec::put_usize(buf, model.features_per_split());
    codec::put_u64(buf, model.seed());
    codec::put_usize(buf, model.dim());
    codec::put_usize(buf, model.n_trees());
    for tree in model.trees() {
        write_tree(buf, tree);
    }
}

fn read_forest(r: &mut Reader<'_>) -> Result<RandomForestModel, ModelFileError> {
    let max_depth = r.usize()?;
    let min_leaf = r.usize()?;
    let features_per_split = r.usize()?;
    let seed = r.u64()?;
    let dim = r.usize()?;
    let n_trees = r.usize()?;
    let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
    for _ in 0..n_trees {
        trees.push(read_tree(r)?);
    }
    Ok(RandomForestModel::from_parts(trees, max_depth, min_leaf, features_per_split, seed, dim))
}

fn write_mat(buf: &mut Vec<u8>, mat: &Mat) {
    codec::put_usize(buf, mat.rows());
    codec::put_usize(buf, mat.cols());
    for &v in mat.data() {
        codec::put_f64(buf, v);
    }
}

fn read_mat(r: &mut Reader<'_>) -> Result<Mat, ModelFileError> {
    let rows = r.usize()?;
    let cols = r.usize()?;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| ModelFileError::Malformed("matrix shape overflow".into()))?;
    let mut data = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        data.push(r.f64()?);
    }
    Ok(Mat::from_vec(rows, cols, data))
}

fn write_cnn(buf: &mut Vec<u8>, model: &CnnModel) {
    let config = model.config();
    codec::put_usize(buf, config.embed_dim);
    codec::put_usize(buf, config.filter_widths.len());
    for &w in &config.filter_widths {
        codec::put_usize(buf, w);
    }
    codec::put_usize(buf, config.filters_per_width);
    codec::put_usize(buf, config.max_len);
    codec::put_u32(buf, config.epochs);
    codec::put_usize(buf, config.batch_size);
    codec::put_f64(buf, config.learning_rate);
    codec::put_f64(buf, config.beta1);
    codec::put_f64(buf, config.beta2);
    codec::put_f64(buf, config.eps);
    codec::put_u64(buf, config.seed);
    codec::put_usize(buf, model.vocab_size());
    write_mat(buf, model.embedding());
    codec::put_usize(buf, model.convs().len());
    for conv in model.convs() {
        codec::put_usize(buf, conv.width);
        write_mat(buf, &conv.kernels);
        codec::put_f64_slice(buf, &conv.bias);
    }
    write_mat(buf, model.dense_w());
    codec::put_f64(buf, model.dense_b()[0]);
    codec::put_f64(buf, model.dense_b()[1]);
}

fn read_cnn(r: &mut Reader<'_>) -> Result<CnnModel, ModelFileError> {
    let embed_dim = r.usize()?;
    let width_count = r.usize()?;
    let mut filter_widths = Vec::with_capacity(width_count.min(64));
    for _ in 0..width_count {
        filter_widths.push(r.usize()?);
    }
    let filters_per_width = r.usize()?;
    let max_len = r.usize()?;
    let epochs = r.u32()?;
    let batch_size = r.usize()?;
    let learning_rate = r.f64()?;
    let beta1 = r.f64()?;
    let beta2 = r.f64()?;
    let eps = r.f64()?;
    let seed = r.u64()?;
    let config = CnnConfig {
        embed_dim,
        filter_widths,
        filters_per_width,
        max_len,
        epochs,
        batch_size,
        learning_rate,
        beta1,
        beta2,
        eps,
        seed,
    };
    let vocab_size = r.usize()?;
    let embedding = read_mat(r)?;
    let conv_count = r.usize()?;
    let mut convs = Vec::with_capacity(conv_count.min(64));
    for _ in 0..conv_count {
        let width = r.usize()?;
        let kernels = read_mat(r)?;
        let bias = r.f64_vec()?;
        convs.push(ConvLayer { width, kernels, bias });
    }
    let dense_w = read_mat(r)?;
    let dense_b = [r.f64()?, r.f64()?];

    if embedding.rows() != vocab_size + 2 || embedding.cols() != embed_dim {
        return Err(ModelFileError::Malformed("embedding shape mismatch".into()));
    }
    if convs.len() != config.filter_widths.len() {
        return Err(ModelFileError::Malformed("conv layer count mismatch".into()));
    }
    Ok(CnnModel::from_parts(embedding, convs, dense_w, dense_b, config, vocab_size))
}

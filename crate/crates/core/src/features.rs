//! Feature extraction: word n-gram vocabularies, TF-IDF sparse vectors, an
//! optional character n-gram count channel, and padded index sequences for
//! the CNN.
//!
//! Vocabularies assign indices in lexicographic term order, so fitting is
//! deterministic across runs and platforms. TF-IDF uses the smoothed inverse
//! document frequency `idf(t) = ln((1 + N) / (1 + df(t))) + 1` followed by
//! per-document L2 normalization.

use std::collections::HashMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::pipeline::TokenSequence;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("invalid n-gram range {min}..={max}")]
    InvalidNgramRange { min: usize, max: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("min_df must be at least 1")]
    InvalidMinDf,
}

/// Sorted-index sparse vector; the currency between features and the linear
/// models. Indices are strictly increasing and no stored value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Builds a vector from entries that must already be sorted by strictly
    /// increasing index; zero values are dropped.
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(i, _)| i < dim));
        let entries = entries.into_iter().filter(|&(_, v)| v != 0.0).collect();
        SparseVector { dim, entries }
    }

    pub fn zero(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value at `index` (0.0 when absent).
    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let mut sum = 0.0;
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some(&&(ia, va)), Some(&&(ib, vb))) = (a.peek(), b.peek()) {
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += va * vb;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i] * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            dense[i] = v;
        }
        dense
    }
}

/// A fitted n-gram vocabulary: term → dense column index (lexicographic
/// order), per-term document frequencies, and the corpus size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    term_to_index: HashMap<String, usize>,
    document_frequency: Vec<u32>,
    ngram_min: usize,
    ngram_max: usize,
    corpus_size: usize,
}

impl Vocabulary {
    pub(crate) fn from_parts(
        terms: Vec<String>,
        document_frequency: Vec<u32>,
        ngram_min: usize,
        ngram_max: usize,
        corpus_size: usize,
    ) -> Self {
        debug_assert_eq!(terms.len(), document_frequency.len());
        debug_assert!(terms.windows(2).all(|w| w[0] < w[1]), "terms must be sorted");
        let term_to_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms,
            term_to_index,
            document_frequency,
            ngram_min,
            ngram_max,
            corpus_size,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn document_frequency(&self, index: usize) -> u32 {
        self.document_frequency[index]
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        (self.ngram_min, self.ngram_max)
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequencies(&self) -> &[u32] {
        &self.document_frequency
    }

    /// Writes the dump format: `index<TAB>term<TAB>document_frequency`
    /// lines sorted by index.
    pub fn write_dump(&self, mut w: impl Write) -> io::Result<()> {
        for (i, term) in self.terms.iter().enumerate() {
            writeln!(w, "{i}\t{term}\t{}", self.document_frequency[i])?;
        }
        Ok(())
    }
}

/// Per-order minimum document frequencies for vocabulary construction.
///
/// Defaults keep every unigram but require n-grams of order ≥ 2 to appear in
/// at least two documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabularyOptions {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub min_df_unigram: u32,
    pub min_df_higher: u32,
}

impl Default for VocabularyOptions {
    fn default() -> Self {
        VocabularyOptions {
            ngram_min: 1,
            ngram_max: 3,
            min_df_unigram: 1,
            min_df_higher: 2,
        }
    }
}

impl VocabularyOptions {
    pub fn uniform(ngram_min: usize, ngram_max: usize, min_df: u32) -> Self {
        VocabularyOptions {
            ngram_min,
            ngram_max,
            min_df_unigram: min_df,
            min_df_higher: min_df,
        }
    }

    fn validate(&self) -> Result<(), FeatureError> {
        if self.ngram_min < 1 || self.ngram_min > self.ngram_max {
            return Err(FeatureError::InvalidNgramRange {
                min: self.ngram_min,
                max: self.ngram_max,
            });
        }
        if self.min_df_unigram < 1 || self.min_df_higher < 1 {
            return Err(FeatureError::InvalidMinDf);
        }
        Ok(())
    }

    fn min_df_for_order(&self, order: usize) -> u32 {
        if order == 1 {
            self.min_df_unigram
        } else {
            self.min_df_higher
        }
    }
}

/// All contiguous n-grams of each order `nmin..=nmax`, in document order,
/// tokens joined with a single space.
pub fn extract_ngrams(
    seq: &TokenSequence,
    nmin: usize,
    nmax: usize,
) -> Result<Vec<String>, FeatureError> {
    if nmin < 1 || nmin > nmax {
        return Err(FeatureError::InvalidNgramRange { min: nmin, max: nmax });
    }
    let tokens = seq.tokens();
    let mut grams = Vec::new();
    for n in nmin..=nmax {
        if tokens.len() < n {
            break;
        }
        for window in tokens.windows(n) {
            grams.push(window.join(" "));
        }
    }
    Ok(grams)
}

fn ngram_order(term: &str) -> usize {
    term.split(' ').count()
}

/// Builds a vocabulary with a uniform document-frequency threshold.
pub fn build_vocabulary(
    corpus: &[TokenSequence],
    nmin: usize,
    nmax: usize,
    min_df: u32,
) -> Result<Vocabulary, FeatureError> {
    build_vocabulary_with(corpus, &VocabularyOptions::uniform(nmin, nmax, min_df))
}

/// Builds a vocabulary with per-order thresholds.
pub fn build_vocabulary_with(
    corpus: &[TokenSequence],
    options: &VocabularyOptions,
) -> Result<Vocabulary, FeatureError> {
    options.validate()?;
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let mut df: HashMap<String, u32> = HashMap::new();
    let mut seen = Vec::new();
    for seq in corpus {
        seen.clear();
        seen.extend(extract_ngrams(seq, options.ngram_min, options.ngram_max)?);
        seen.sort_unstable();
        seen.dedup();
        for gram in seen.drain(..) {
            *df.entry(gram).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, u32)> = df
        .into_iter()
        .filter(|(term, count)| *count >= options.min_df_for_order(ngram_order(term)))
        .collect();
    kept.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let (terms, frequencies): (Vec<String>, Vec<u32>) = kept.into_iter().unzip();
    Ok(Vocabulary::from_parts(
        terms,
        frequencies,
        options.ngram_min,
        options.ngram_max,
        corpus.len(),
    ))
}

/// Raw occurrence counts of in-vocabulary n-grams; out-of-vocabulary
/// n-grams are ignored.
pub fn count_vector(seq: &TokenSequence, vocab: &Vocabulary) -> SparseVector {
    let (nmin, nmax) = vocab.ngram_range();
    let grams = extract_ngrams(seq, nmin, nmax).expect("vocabulary carries a valid range");
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for gram in grams {
        if let Some(index) = vocab.index_of(&gram) {
            *counts.entry(index).or_insert(0.0) += 1.0;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts.into_iter().collect();
    entries.sort_unstable_by_key(|&(i, _)| i);
    SparseVector::new(vocab.len(), entries)
}

/// A fitted TF-IDF model: vocabulary plus smoothed IDF weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    vocab: Vocabulary,
    idf: Vec<f64>,
    l2_normalize: bool,
}

impl TfIdfModel {
    pub fn from_parts(vocab: Vocabulary, idf: Vec<f64>, l2_normalize: bool) -> Self {
        debug_assert_eq!(vocab.len(), idf.len());
        TfIdfModel { vocab, idf, l2_normalize }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn l2_normalize(&self) -> bool {
        self.l2_normalize
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    /// `count(t) · idf(t)` per term, then L2 normalization of the whole
    /// vector when enabled. All-OOV documents map to the zero vector.
    pub fn transform(&self, seq: &TokenSequence) -> SparseVector {
        let counts = count_vector(seq, &self.vocab);
        let mut entries: Vec<(usize, f64)> = counts
            .entries()
            .iter()
            .map(|&(i, c)| (i, c * self.idf[i]))
            .collect();
        if self.l2_normalize {
            let norm = entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for entry in &mut entries {
                    entry.1 /= norm;
                }
            }
        }
        SparseVector::new(self.vocab.len(), entries)
    }
}

fn idf_weights(vocab: &Vocabulary) -> Vec<f64> {
    let n = vocab.corpus_size() as f64;
    vocab
        .document_frequencies()
        .iter()
        .map(|&df| ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0)
        .collect()
}

/// Fits TF-IDF with a uniform document-frequency threshold.
pub fn fit_tfidf(
    corpus: &[TokenSequence],
    nmin: usize,
    nmax: usize,
    min_df: u32,
) -> Result<TfIdfModel, FeatureError> {
    fit_tfidf_with(corpus, &VocabularyOptions::uniform(nmin, nmax, min_df))
}

pub fn fit_tfidf_with(
    corpus: &[TokenSequence],
    options: &VocabularyOptions,
) -> Result<TfIdfModel, FeatureError> {
    let vocab = build_vocabulary_with(corpus, options)?;
    let idf = idf_weights(&vocab);
    Ok(TfIdfModel { vocab, idf, l2_normalize: true })
}

/// Feature-space configuration: the word TF-IDF block plus the optional
/// character n-gram count channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureOptions {
    pub word: VocabularyOptions,
    pub char_ngrams: Option<CharNgramOptions>,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions { word: VocabularyOptions::default(), char_ngrams: None }
    }
}

/// Character n-grams are taken inside each token (no cross-token grams),
/// counted, and concatenated after the word block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharNgramOptions {
    pub nmin: usize,
    pub nmax: usize,
    pub min_df: u32,
}

impl Default for CharNgramOptions {
    fn default() -> Self {
        CharNgramOptions { nmin: 2, nmax: 5, min_df: 2 }
    }
}

fn char_ngrams(seq: &TokenSequence, nmin: usize, nmax: usize) -> Vec<String> {
    let mut grams = Vec::new();
    for token in seq {
        let chars: Vec<char> = token.chars().collect();
        for n in nmin..=nmax {
            if chars.len() < n {
                break;
            }
            for window in chars.windows(n) {
                grams.push(window.iter().collect());
            }
        }
    }
    grams
}

/// The fitted feature space shared by the SVM and the forest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    tfidf: TfIdfModel,
    char_vocab: Option<Vocabulary>,
}

impl FeatureSpace {
    pub fn fit(corpus: &[TokenSequence], options: &FeatureOptions) -> Result<Self, FeatureError> {
        let tfidf = fit_tfidf_with(corpus, &options.word)?;
        let char_vocab = match options.char_ngrams {
            None => None,
            Some(opts) => {
                if corpus.is_empty() {
                    return Err(FeatureError::EmptyCorpus);
                }
                let mut df: HashMap<String, u32> = HashMap::new();
                for seq in corpus {
                    let mut grams = char_ngrams(seq, opts.nmin, opts.nmax);
                    grams.sort_unstable();
                    grams.dedup();
                    for gram in grams {
                        *df.entry(gram).or_insert(0) += 1;
                    }
                }
                let mut kept: Vec<(String, u32)> =
                    df.into_iter().filter(|&(_, c)| c >= opts.min_df).collect();
                kept.sort_unstable_by(|a, b| a.0.cmp(&b.0));
                let (terms, frequencies): (Vec<String>, Vec<u32>) = kept.into_iter().unzip();
                Some(Vocabulary::from_parts(
                    terms,
                    frequencies,
                    opts.nmin,
                    opts.nmax,
                    corpus.len(),
                ))
            }
        };
        Ok(FeatureSpace { tfidf, char_vocab })
    }

    pub fn from_parts(tfidf: TfIdfModel, char_vocab: Option<Vocabulary>) -> Self {
        FeatureSpace { tfidf, char_vocab }
    }

    pub fn tfidf(&self) -> &TfIdfModel {
        &self.tfidf
    }

    pub fn char_vocab(&self) -> Option<&Vocabulary> {
        self.char_vocab.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.tfidf.dim() + self.char_vocab.as_ref().map_or(0, Vocabulary::len)
    }

    /// Word TF-IDF block, then (when enabled) raw character n-gram counts
    /// shifted past the word block.
    pub fn transform(&self, seq: &TokenSequence) -> SparseVector {
        let word = self.tfidf.transform(seq);
        let Some(char_vocab) = &self.char_vocab else {
            return word;
        };
        let offset = self.tfidf.dim();
        let mut entries = word.entries().to_vec();
        let (nmin, nmax) = char_vocab.ngram_range();
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for gram in char_ngrams(seq, nmin, nmax) {
            if let Some(index) = char_vocab.index_of(&gram) {
                *counts.entry(index).or_insert(0.0) += 1.0;
            }
        }
        let mut char_entries: Vec<(usize, f64)> =
            counts.into_iter().map(|(i, v)| (offset + i, v)).collect();
        char_entries.sort_unstable_by_key(|&(i, _)| i);
        entries.extend(char_entries);
        SparseVector::new(self.dim(), entries)
    }

    /// Transforms a batch of documents; data-parallel under the `parallel`
    /// feature, with output order always matching input order.
    pub fn transform_batch(&self, docs: &[TokenSequence]) -> Vec<SparseVector> {
        #[cfg(feature = "parallel")]
        {
            docs.par_iter().map(|seq| self.transform(seq)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.transform_batch_serial(docs)
        }
    }

    /// Always-sequential batch transform (the benchmark baseline).
    pub fn transform_batch_serial(&self, docs: &[TokenSequence]) -> Vec<SparseVector> {
        docs.iter().map(|seq| self.transform(seq)).collect()
    }
}

/// A fixed-length index encoding for the CNN: token → vocabulary index + 2,
/// right-padded with 0 (index 1 marks unknown terms).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSequence {
    indices: Vec<u32>,
}

impl IndexSequence {
    pub const PAD: u32 = 0;
    pub const UNKNOWN: u32 = 1;

    pub fn from_indices(indices: Vec<u32>) -> Self {
        IndexSequence { indices }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Encodes a token sequence against a unigram vocabulary, truncating or
/// right-padding to exactly `max_len`.
pub fn encode_sequence(seq: &TokenSequence, vocab: &Vocabulary, max_len: usize) -> IndexSequence {
    assert!(max_len >= 1, "max_len must be at least 1");
    let mut indices = Vec::with_capacity(max_len);
    for token in seq.iter().take(max_len) {
        let index = match vocab.index_of(token) {
            Some(i) => i as u32 + 2,
            None => IndexSequence::UNKNOWN,
        };
        indices.push(index);
    }
    indices.resize(max_len, IndexSequence::PAD);
    IndexSequence { indices }
}

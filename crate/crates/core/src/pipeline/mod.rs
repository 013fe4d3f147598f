//! The five-stage preprocessing pipeline: tokenize, lowercase, filter
//! punctuation, remove stop words, stem. Every stage is a pure function on a
//! [`TokenSequence`]; [`run_pipeline`] chains them in that fixed order with
//! disabled stages acting as the identity.
//!
//! Tokenizer conventions (tweets): split on unicode whitespace, then peel
//! leading/trailing punctuation marks into their own tokens. Tokens that
//! contain `://` (URLs) are kept whole, and a leading `#` or `@` followed by
//! an alphanumeric stays attached to its word.

mod porter;
mod stopwords;

pub use porter::stem_token;
pub use stopwords::StopwordList;

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// An ordered sequence of non-empty tokens.
///
/// No stage ever reorders tokens or emits an empty string.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty()));
        TokenSequence { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.tokens.iter()
    }

    pub fn into_vec(self) -> Vec<String> {
        self.tokens
    }

    /// Tokens joined with single spaces, as written by `preprocess`.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

impl From<Vec<&str>> for TokenSequence {
    fn from(tokens: Vec<&str>) -> Self {
        TokenSequence::new(tokens.into_iter().map(str::to_string).collect())
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Which stages run, and with which stop-word list.
///
/// The default enables everything, matching the order tokenize → lowercase →
/// punctuation filter → stop-word filter → stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub remove_stopwords: bool,
    pub stem: bool,
    pub stopwords: StopwordList,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lowercase: true,
            strip_punctuation: true,
            remove_stopwords: true,
            stem: true,
            stopwords: StopwordList::default(),
        }
    }
}

impl PipelineConfig {
    /// Tokenize-only configuration (all optional stages off).
    pub fn tokenize_only() -> Self {
        PipelineConfig {
            lowercase: false,
            strip_punctuation: false,
            remove_stopwords: false,
            stem: false,
            stopwords: StopwordList::default(),
        }
    }
}

/// Punctuation for tokenization and filtering: unicode general categories P*
/// plus the ASCII symbols `$ + < = > ^ | ~`.
pub fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
        || matches!(c, '$' | '+' | '<' | '=' | '>' | '^' | '|' | '~')
}

/// Splits text into tokens. Total: any unicode input, possibly empty.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        // URL convention: anything with a scheme separator stays one token
        if chunk.contains("://") {
            tokens.push(chunk.to_string());
            continue;
        }
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let end = chars.len();
        while start < end && is_punctuation(chars[start]) {
            let keeps_sigil = matches!(chars[start], '#' | '@')
                && start + 1 < end
                && chars[start + 1].is_alphanumeric();
            if keeps_sigil {
                break;
            }
            tokens.push(chars[start].to_string());
            start += 1;
        }
        let mut trailing = end;
        while trailing > start && is_punctuation(chars[trailing - 1]) {
            trailing -= 1;
        }
        if trailing > start {
            tokens.push(chars[start..trailing].iter().collect());
        }
        for &c in &chars[trailing..end.max(trailing)] {
            tokens.push(c.to_string());
        }
    }
    TokenSequence::new(tokens)
}

/// Maps every token to lowercase. Length-preserving.
pub fn to_lowercase(seq: &TokenSequence) -> TokenSequence {
    TokenSequence::new(seq.iter().map(|t| t.to_lowercase()).collect())
}

/// Drops pure-punctuation tokens and strips leading/trailing punctuation from
/// mixed tokens; internal punctuation (hyphens, apostrophes) is kept.
pub fn filter_punctuation(seq: &TokenSequence) -> TokenSequence {
    let mut tokens = Vec::with_capacity(seq.len());
    for token in seq {
        let trimmed = token.trim_matches(is_punctuation);
        if !trimmed.is_empty() {
            tokens.push(trimmed.to_string());
        }
    }
    TokenSequence::new(tokens)
}

/// Removes every token whose exact lowercase form is in `list`.
pub fn filter_stopwords(seq: &TokenSequence, list: &StopwordList) -> TokenSequence {
    let mut tokens = Vec::with_capacity(seq.len());
    for token in seq {
        let lowered = token.to_lowercase();
        if !list.contains(&lowered) {
            tokens.push(token.clone());
        }
    }
    TokenSequence::new(tokens)
}

/// Stems every token with [`stem_token`].
pub fn stem_tokens(seq: &TokenSequence) -> TokenSequence {
    TokenSequence::new(seq.iter().map(|t| stem_token(t)).collect())
}

/// Runs the stages in the fixed order; disabled stages are the identity.
pub fn run_pipeline(text: &str, config: &PipelineConfig) -> TokenSequence {
    let mut seq = tokenize(text);
    if config.lowercase {
        seq = to_lowercase(&seq);
    }
    if config.strip_punctuation {
        seq = filter_punctuation(&seq);
    }
    if config.remove_stopwords {
        seq = filter_stopwords(&seq, &config.stopwords);
    }
    if config.stem {
        seq = stem_tokens(&seq);
    }
    seq
}

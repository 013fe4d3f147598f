//! Effective run settings: defaults, overridden by the optional key=value
//! config file, overridden by command-line flags.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use tweetsift::cnn::CnnConfig;
use tweetsift::features::{CharNgramOptions, FeatureOptions, VocabularyOptions};
use tweetsift::forest::ForestParams;
use tweetsift::pipeline::{PipelineConfig, StopwordList};

use crate::CliError;

/// Parsed `key=value` lines; `#` comments and blank lines ignored.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let contents = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (index, line) in contents.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Input(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    index + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Input(format!("config key {key}: cannot parse {raw:?}"))
            }),
        }
    }

    fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }
}

/// One resolved value: flag wins, then config file, then the default.
fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineFlags {
    pub no_lowercase: bool,
    pub no_punctuation_filter: bool,
    pub no_stopwords: bool,
    pub no_stem: bool,
}

pub fn resolve_pipeline(
    flags: &PipelineFlags,
    stopword_file: Option<&Path>,
    config: &ConfigFile,
) -> Result<PipelineConfig, CliError> {
    let defaults = PipelineConfig::default();
    let stopwords = match stopword_file
        .map(Path::to_path_buf)
        .or_else(|| config.get_path("pipeline.stopword-file"))
    {
        Some(path) => StopwordList::from_file(&path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => defaults.stopwords,
    };
    Ok(PipelineConfig {
        lowercase: pick(
            flags.no_lowercase.then_some(false),
            config.get("pipeline.lowercase")?,
            defaults.lowercase,
        ),
        strip_punctuation: pick(
            flags.no_punctuation_filter.then_some(false),
            config.get("pipeline.punctuation")?,
            defaults.strip_punctuation,
        ),
        remove_stopwords: pick(
            flags.no_stopwords.then_some(false),
            config.get("pipeline.stopwords")?,
            defaults.remove_stopwords,
        ),
        stem: pick(flags.no_stem.then_some(false), config.get("pipeline.stem")?, defaults.stem),
        stopwords,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureFlags {
    pub ngram_min: Option<usize>,
    pub ngram_max: Option<usize>,
    pub min_df_unigram: Option<u32>,
    pub min_df_ngram: Option<u32>,
    pub char_ngrams: bool,
}

pub fn resolve_features(flags: &FeatureFlags, config: &ConfigFile) -> Result<FeatureOptions, CliError> {
    let defaults = VocabularyOptions::default();
    let word = VocabularyOptions {
        ngram_min: pick(flags.ngram_min, config.get("features.ngram-min")?, defaults.ngram_min),
        ngram_max: pick(flags.ngram_max, config.get("features.ngram-max")?, defaults.ngram_max),
        min_df_unigram: pick(
            flags.min_df_unigram,
            config.get("features.min-df-unigram")?,
            defaults.min_df_unigram,
        ),
        min_df_higher: pick(
            flags.min_df_ngram,
            config.get("features.min-df-ngram")?,
            defaults.min_df_higher,
        ),
    };
    let char_enabled =
        pick(flags.char_ngrams.then_some(true), config.get("features.char-ngrams")?, false);
    Ok(FeatureOptions {
        word,
        char_ngrams: char_enabled.then(CharNgramOptions::default),
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SvmFlags {
    pub lambda: Option<f64>,
    pub epochs: Option<u32>,
}

pub struct SvmSettings {
    pub lambda: f64,
    pub epochs: u32,
}

pub fn resolve_svm(flags: &SvmFlags, config: &ConfigFile) -> Result<SvmSettings, CliError> {
    Ok(SvmSettings {
        lambda: pick(flags.lambda, config.get("svm.lambda")?, tweetsift::svm::DEFAULT_LAMBDA),
        epochs: pick(flags.epochs, config.get("svm.epochs")?, tweetsift::svm::DEFAULT_EPOCHS),
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ForestFlags {
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
    pub features_per_split: Option<usize>,
}

pub fn resolve_forest(
    flags: &ForestFlags,
    config: &ConfigFile,
    seed: u64,
) -> Result<ForestParams, CliError> {
    let defaults = ForestParams::default();
    Ok(ForestParams {
        n_trees: pick(flags.trees, config.get("forest.trees")?, defaults.n_trees),
        max_depth: pick(flags.max_depth, config.get("forest.max-depth")?, defaults.max_depth),
        min_leaf: pick(flags.min_leaf, config.get("forest.min-leaf")?, defaults.min_leaf),
        features_per_split: flags
            .features_per_split
            .or(config.get("forest.features-per-split")?),
        seed,
    })
}

#[derive(Debug, Clone, Default)]
pub struct CnnFlags {
    pub embed_dim: Option<usize>,
    pub filter_widths: Option<String>,
    pub filters: Option<usize>,
    pub max_len: Option<usize>,
    pub epochs: Option<u32>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
}

fn parse_widths(raw: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("invalid filter width {part:?}")))
        })
        .collect()
}

pub fn resolve_cnn(flags: &CnnFlags, config: &ConfigFile, seed: u64) -> Result<CnnConfig, CliError> {
    let defaults = CnnConfig::default();
    let widths_raw: Option<String> =
        flags.filter_widths.clone().or(config.get("cnn.filter-widths")?);
    let filter_widths = match widths_raw {
        Some(raw) => parse_widths(&raw)?,
        None => defaults.filter_widths.clone(),
    };
    Ok(CnnConfig {
        embed_dim: pick(flags.embed_dim, config.get("cnn.embed-dim")?, defaults.embed_dim),
        filter_widths,
        filters_per_width: pick(flags.filters, config.get("cnn.filters")?, defaults.filters_per_width),
        max_len: pick(flags.max_len, config.get("cnn.max-len")?, defaults.max_len),
        epochs: pick(flags.epochs, config.get("cnn.epochs")?, defaults.epochs),
        batch_size: pick(flags.batch_size, config.get("cnn.batch-size")?, defaults.batch_size),
        learning_rate: pick(
            flags.learning_rate,
            config.get("cnn.learning-rate")?,
            defaults.learning_rate,
        ),
        seed,
        ..defaults
    })
}

pub fn resolve_seed(flag: Option<u64>, config: &ConfigFile) -> Result<u64, CliError> {
    Ok(pick(flag, config.get("seed")?, 42))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_from(text: &str) -> ConfigFile {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, text).unwrap();
        ConfigFile::load(Some(&path)).unwrap()
    }

    #[test]
    fn flags_override_config_which_overrides_defaults() {
        let config = config_from("svm.lambda = 0.5\n# comment\nseed=7\n");
        let from_config = resolve_svm(&SvmFlags::default(), &config).unwrap();
        assert_eq!(from_config.lambda, 0.5);
        assert_eq!(from_config.epochs, 50);

        let flags = SvmFlags { lambda: Some(0.25), epochs: None };
        let from_flags = resolve_svm(&flags, &config).unwrap();
        assert_eq!(from_flags.lambda, 0.25);

        assert_eq!(resolve_seed(None, &config).unwrap(), 7);
        assert_eq!(resolve_seed(Some(9), &config).unwrap(), 9);
    }

    #[test]
    fn pipeline_flags_disable_stages() {
        let config = ConfigFile::default();
        let flags = PipelineFlags { no_stem: true, ..Default::default() };
        let pipeline = resolve_pipeline(&flags, None, &config).unwrap();
        assert!(!pipeline.stem);
        assert!(pipeline.lowercase);
    }

    #[test]
    fn malformed_config_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        std::fs::write(&path, "not a pair\n").unwrap();
        assert!(matches!(ConfigFile::load(Some(&path)), Err(CliError::Input(_))));
    }

    #[test]
    fn cnn_widths_parse_from_config() {
        let config = config_from("cnn.filter-widths=2, 3 ,4\n");
        let cnn = resolve_cnn(&CnnFlags::default(), &config, 42).unwrap();
        assert_eq!(cnn.filter_widths, vec![2, 3, 4]);
        assert_eq!(cnn.seed, 42);
    }
}

//! `tweetsift`: train, apply and score tweet informativeness classifiers.
//!
//! Exit codes: 0 success, 2 input/IO errors, 3 data/semantic errors
//! (single-class training data, id join failures), 4 model-format errors.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use settings::{CnnFlags, ConfigFile, FeatureFlags, ForestFlags, PipelineFlags, SvmFlags};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed inputs (exit 2).
    Input(String),
    /// Semantically unusable data: single-class training sets, id
    /// collisions, join failures (exit 3).
    Data(String),
    /// Model-file problems: bad magic, version mismatch, truncation (exit 4).
    Model(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Data(_) => 3,
            CliError::Model(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Data(m) | CliError::Model(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "tweetsift", version, about = "Tweet informativeness classification toolkit")]
struct Cli {
    /// Seed for every random choice (shuffles, bootstraps, initialization)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for data-parallel sections (0 = auto)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Optional key=value configuration file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Svm,
    Rf,
    Cnn,
}

#[derive(Args)]
struct PipelineArgs {
    /// Keep original casing
    #[arg(long)]
    no_lowercase: bool,
    /// Keep punctuation tokens
    #[arg(long)]
    no_punctuation_filter: bool,
    /// Keep stop words
    #[arg(long)]
    no_stopwords: bool,
    /// Skip stemming
    #[arg(long)]
    no_stem: bool,
    /// Stop-word list file (one word per line, # comments)
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl PipelineArgs {
    fn flags(&self) -> PipelineFlags {
        PipelineFlags {
            no_lowercase: self.no_lowercase,
            no_punctuation_filter: self.no_punctuation_filter,
            no_stopwords: self.no_stopwords,
            no_stem: self.no_stem,
        }
    }
}

#[derive(Args)]
struct FeatureArgs {
    /// Smallest word n-gram order
    #[arg(long)]
    ngram_min: Option<usize>,
    /// Largest word n-gram order
    #[arg(long)]
    ngram_max: Option<usize>,
    /// Minimum document frequency for unigrams
    #[arg(long)]
    min_df_unigram: Option<u32>,
    /// Minimum document frequency for higher-order n-grams
    #[arg(long)]
    min_df_ngram: Option<u32>,
    /// Add the character n-gram count channel (orders 2-5)
    #[arg(long)]
    char_ngrams: bool,
}

impl FeatureArgs {
    fn flags(&self) -> FeatureFlags {
        FeatureFlags {
            ngram_min: self.ngram_min,
            ngram_max: self.ngram_max,
            min_df_unigram: self.min_df_unigram,
            min_df_ngram: self.min_df_ngram,
            char_ngrams: self.char_ngrams,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the preprocessing pipeline and write `id<TAB>tokens` lines
    Preprocess {
        /// Input dataset TSV
        input: PathBuf,
        /// Output path
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Train a classifier and write a model file
    Train {
        /// Which model to train
        #[arg(value_enum)]
        model: ModelKind,
        /// Labeled training TSV
        train: PathBuf,
        /// Also train on this labeled validation TSV
        #[arg(long)]
        merge_dev: Option<PathBuf>,
        /// Output model path
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        features: FeatureArgs,
        /// SVM regularization strength
        #[arg(long)]
        lambda: Option<f64>,
        /// SVM training epochs
        #[arg(long)]
        svm_epochs: Option<u32>,
        /// Number of forest trees
        #[arg(long)]
        trees: Option<usize>,
        /// Maximum tree depth
        #[arg(long)]
        max_depth: Option<usize>,
        /// Minimum samples per leaf
        #[arg(long)]
        min_leaf: Option<usize>,
        /// Features drawn per split (default ceil(sqrt(dim)))
        #[arg(long)]
        features_per_split: Option<usize>,
        /// CNN embedding size
        #[arg(long)]
        embed_dim: Option<usize>,
        /// CNN filter widths, comma separated (e.g. 3,4,5)
        #[arg(long)]
        filter_widths: Option<String>,
        /// CNN filters per width
        #[arg(long)]
        filters: Option<usize>,
        /// CNN sequence length budget
        #[arg(long)]
        max_len: Option<usize>,
        /// CNN training epochs
        #[arg(long)]
        cnn_epochs: Option<u32>,
        /// CNN mini-batch size
        #[arg(long)]
        batch_size: Option<usize>,
        /// CNN Adam learning rate
        #[arg(long)]
        learning_rate: Option<f64>,
    },
    /// Apply a trained model file to a dataset and write predictions
    Predict {
        /// Model file written by `train`
        model: PathBuf,
        /// Input dataset TSV (labels optional, ignored)
        input: PathBuf,
        /// Output prediction TSV
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Score a prediction file against gold labels
    Evaluate {
        /// Gold dataset TSV (labeled)
        gold: PathBuf,
        /// Prediction TSV (`Id<TAB>Label`)
        predictions: PathBuf,
        /// Also print per-class metrics
        #[arg(long)]
        per_class: bool,
        /// Also print the confusion matrix
        #[arg(long)]
        confusion: bool,
        /// Write the machine-readable key=value report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = ConfigFile::load(cli.config.as_deref())?;
    let seed = settings::resolve_seed(cli.seed, &config)?;

    #[cfg(feature = "parallel")]
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    if let Some(threads) = cli.threads {
        if threads > 1 {
            eprintln!("note: built without the parallel feature; --threads {threads} ignored");
        }
    }

    match cli.command {
        Command::Preprocess { input, out, pipeline } => {
            let pipeline = settings::resolve_pipeline(&pipeline.flags(), pipeline.stopwords.as_deref(), &config)?;
            commands::preprocess(&input, &out, &pipeline)
        }
        Command::Train {
            model,
            train,
            merge_dev,
            out,
            pipeline,
            features,
            lambda,
            svm_epochs,
            trees,
            max_depth,
            min_leaf,
            features_per_split,
            embed_dim,
            filter_widths,
            filters,
            max_len,
            cnn_epochs,
            batch_size,
            learning_rate,
        } => {
            let pipeline_config =
                settings::resolve_pipeline(&pipeline.flags(), pipeline.stopwords.as_deref(), &config)?;
            let feature_options = settings::resolve_features(&features.flags(), &config)?;
            let spec = match model {
                ModelKind::Svm => {
                    let svm = settings::resolve_svm(&SvmFlags { lambda, epochs: svm_epochs }, &config)?;
                    commands::TrainSpec::Svm { lambda: svm.lambda, epochs: svm.epochs, seed }
                }
                ModelKind::Rf => {
                    let flags = ForestFlags { trees, max_depth, min_leaf, features_per_split };
                    commands::TrainSpec::Forest(settings::resolve_forest(&flags, &config, seed)?)
                }
                ModelKind::Cnn => {
                    let flags = CnnFlags {
                        embed_dim,
                        filter_widths,
                        filters,
                        max_len,
                        epochs: cnn_epochs,
                        batch_size,
                        learning_rate,
                    };
                    commands::TrainSpec::Cnn(settings::resolve_cnn(&flags, &config, seed)?)
                }
            };
            commands::train(&train, merge_dev.as_deref(), &out, &pipeline_config, &feature_options, spec)
        }
        Command::Predict { model, input, out } => commands::predict(&model, &input, &out),
        Command::Evaluate { gold, predictions, per_class, confusion, out } => {
            commands::evaluate(&gold, &predictions, per_class, confusion, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

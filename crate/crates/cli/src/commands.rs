//! The four workflows behind the subcommands.

use std::io::Write;
use std::path::Path;

use tweetsift::cnn::{train_cnn, CnnConfig};
use tweetsift::data::{
    load_tsv, merge_splits, write_predictions, DataError, DatasetSplit, ModelFile, SplitName,
    TrainedModel,
};
use tweetsift::eval::{score_prediction_file, EvalError};
use tweetsift::features::{build_vocabulary, encode_sequence, FeatureOptions, FeatureSpace};
use tweetsift::forest::{train_forest, ForestParams};
use tweetsift::pipeline::{run_pipeline, PipelineConfig, TokenSequence};
use tweetsift::svm::train_svm;
use tweetsift::{Label, ModelError};

use crate::CliError;

impl From<DataError> for CliError {
    fn from(err: DataError) -> Self {
        match err {
            DataError::MissingLabel { .. }
            | DataError::IdCollision { .. }
            | DataError::DuplicatePredictionId { .. } => CliError::Data(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> Self {
        match err {
            EvalError::Data(inner) => inner.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<tweetsift::features::FeatureError> for CliError {
    fn from(err: tweetsift::features::FeatureError) -> Self {
        CliError::Data(err.to_string())
    }
}

pub fn preprocess(input: &Path, out: &Path, pipeline: &PipelineConfig) -> Result<(), CliError> {
    let split = load_tsv(input, SplitName::Test)?;
    let mut file = std::fs::File::create(out)
        .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    let mut buffer = String::new();
    for row in &split.rows {
        let tokens = run_pipeline(&row.text, pipeline);
        buffer.push_str(&row.id);
        buffer.push('\t');
        buffer.push_str(&tokens.joined());
        buffer.push('\n');
    }
    file.write_all(buffer.as_bytes())
        .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    eprintln!("preprocessed {} rows -> {}", split.len(), out.display());
    Ok(())
}

pub enum TrainSpec {
    Svm { lambda: f64, epochs: u32, seed: u64 },
    Forest(ForestParams),
    Cnn(CnnConfig),
}

fn labeled_corpus(split: &DatasetSplit, pipeline: &PipelineConfig) -> (Vec<TokenSequence>, Vec<Label>) {
    let corpus = split.rows.iter().map(|row| run_pipeline(&row.text, pipeline)).collect();
    let labels = split.rows.iter().map(|row| row.label.expect("split is labeled")).collect();
    (corpus, labels)
}

fn training_accuracy(file: &ModelFile, split: &DatasetSplit) -> f64 {
    let correct = split
        .rows
        .iter()
        .filter(|row| file.predict_text(&row.text) == row.label.expect("labeled"))
        .count();
    correct as f64 / split.len() as f64
}

pub fn train(
    train_path: &Path,
    merge_dev: Option<&Path>,
    out: &Path,
    pipeline: &PipelineConfig,
    features: &FeatureOptions,
    spec: TrainSpec,
) -> Result<(), CliError> {
    let mut split = load_tsv(train_path, SplitName::Train)?;
    if let Some(dev_path) = merge_dev {
        let dev = load_tsv(dev_path, SplitName::Validation)?;
        let dev_len = dev.len();
        split = merge_splits(split, dev)?;
        eprintln!("merged {} training + {} validation rows = {}", split.len() - dev_len, dev_len, split.len());
    }
    eprintln!("training rows: {}", split.len());
    let (corpus, labels) = labeled_corpus(&split, pipeline);

    let model = match spec {
        TrainSpec::Svm { lambda, epochs, seed } => {
            let space = FeatureSpace::fit(&corpus, features)?;
            let x = space.transform_batch(&corpus);
            let svm = train_svm(&x, &labels, lambda, epochs, seed)?;
            TrainedModel::Svm { features: space, model: svm }
        }
        TrainSpec::Forest(params) => {
            let space = FeatureSpace::fit(&corpus, features)?;
            let x = space.transform_batch(&corpus);
            let forest = train_forest(&x, &labels, &params)?;
            TrainedModel::Forest { features: space, model: forest }
        }
        TrainSpec::Cnn(config) => {
            let vocab = build_vocabulary(&corpus, 1, 1, 1)?;
            let data: Vec<_> = corpus
                .iter()
                .zip(&labels)
                .map(|(seq, &label)| (encode_sequence(seq, &vocab, config.max_len), label))
                .collect();
            let trained = train_cnn(&data, vocab.len(), &config)?;
            for (epoch, loss) in trained.epoch_losses.iter().enumerate() {
                eprintln!("epoch {:>3}: mean loss {loss:.6}", epoch + 1);
            }
            TrainedModel::Cnn { vocab, model: trained.model }
        }
    };

    let file = ModelFile { pipeline: pipeline.clone(), model };
    file.save(out).map_err(|e| CliError::Input(e.to_string()))?;
    let accuracy = training_accuracy(&file, &split);
    println!("final training accuracy: {:.2}% ({}/{} rows)", accuracy * 100.0, (accuracy * split.len() as f64).round() as usize, split.len());
    eprintln!("model written to {}", out.display());
    Ok(())
}

pub fn predict(model_path: &Path, input: &Path, out: &Path) -> Result<(), CliError> {
    let file = ModelFile::load(model_path).map_err(|e| CliError::Model(e.to_string()))?;
    let split = load_tsv(input, SplitName::Test)?;
    let rows: Vec<(String, Label)> = split
        .rows
        .iter()
        .map(|row| (row.id.clone(), file.predict_text(&row.text)))
        .collect();
    write_predictions(out, &rows)?;
    eprintln!("wrote {} predictions ({}) -> {}", rows.len(), file.model.kind(), out.display());
    Ok(())
}

pub fn evaluate(
    gold: &Path,
    predictions: &Path,
    per_class: bool,
    confusion: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (cm, metrics, per_class_report) = score_prediction_file(gold, predictions)?;
    println!("{}", metrics.render());
    if per_class {
        println!("{}", per_class_report.render());
    }
    if confusion {
        println!("{cm}");
    }
    if let Some(path) = out {
        let report = key_value_report(&cm, &metrics, &per_class_report);
        std::fs::write(path, report)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// `metric=value` lines in a fixed order; percentages with two decimals.
fn key_value_report(
    cm: &tweetsift::eval::ConfusionMatrix,
    metrics: &tweetsift::eval::MetricsReport,
    per_class: &tweetsift::eval::PerClassReport,
) -> String {
    use tweetsift::eval::format_percent as pct;
    let mut out = String::new();
    out.push_str(&format!("accuracy={}\n", pct(metrics.accuracy)));
    out.push_str(&format!("precision={}\n", pct(metrics.precision)));
    out.push_str(&format!("recall={}\n", pct(metrics.recall)));
    out.push_str(&format!("f1={}\n", pct(metrics.f1)));
    for (name, undefined) in [
        ("accuracy", metrics.undefined.accuracy),
        ("precision", metrics.undefined.precision),
        ("recall", metrics.undefined.recall),
        ("f1", metrics.undefined.f1),
    ] {
        if undefined {
            out.push_str(&format!("{name}_undefined=1\n"));
        }
    }
    for (prefix, class) in
        [("informative", &per_class.informative), ("uninformative", &per_class.uninformative)]
    {
        out.push_str(&format!("{prefix}_precision={}\n", pct(class.precision)));
        out.push_str(&format!("{prefix}_recall={}\n", pct(class.recall)));
        out.push_str(&format!("{prefix}_f1={}\n", pct(class.f1)));
    }
    out.push_str(&format!("macro_f1={}\n", pct(per_class.macro_f1())));
    out.push_str(&format!("tp={}\nfp={}\nfn={}\ntn={}\n", cm.true_pos, cm.false_pos, cm.false_neg, cm.true_neg));
    out
}

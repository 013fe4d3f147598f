//! Confusion-matrix construction and the reported metrics: accuracy,
//! precision, recall and F1 for the positive class (INFORMATIVE), per-class
//! breakdowns, and scoring of externally produced prediction files joined
//! to gold by id.
//!
//! Metrics are stored as fractions in [0, 1]; rendering formats them as
//! percentages with exactly two decimals, rounding half away from zero.
//! A 0/0 ratio yields the value 0 with an explicit undefined flag, never a
//! silent NaN.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::data::{load_predictions, load_tsv, DataError, SplitName};
use crate::label::Label;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("cannot evaluate zero predictions")]
    Empty,
    #[error("no prediction for id {0:?}")]
    MissingPrediction(String),
    #[error("duplicate prediction for id {0:?}")]
    DuplicatePrediction(String),
    #[error("gold row {0:?} has no label")]
    UnlabeledGold(String),
    #[error("prediction row {0:?} has no label")]
    UnlabeledPrediction(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// The 2×2 table of (gold, predicted) counts with INFORMATIVE positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn new(true_pos: u64, false_pos: u64, false_neg: u64, true_neg: u64) -> Self {
        ConfusionMatrix { true_pos, false_pos, false_neg, true_neg }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "                 pred INFORMATIVE  pred UNINFORMATIVE")?;
        writeln!(
            f,
            "gold INFORMATIVE   {:>12}      {:>12}",
            self.true_pos, self.false_neg
        )?;
        write!(
            f,
            "gold UNINFORMATIVE {:>12}      {:>12}",
            self.false_pos, self.true_neg
        )
    }
}

/// Counts gold/prediction agreement pairwise.
pub fn confusion_matrix(gold: &[Label], pred: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch { gold: gold.len(), pred: pred.len() });
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (&g, &p) in gold.iter().zip(pred) {
        match (g, p) {
            (Label::Informative, Label::Informative) => cm.true_pos += 1,
            (Label::Uninformative, Label::Informative) => cm.false_pos += 1,
            (Label::Informative, Label::Uninformative) => cm.false_neg += 1,
            (Label::Uninformative, Label::Uninformative) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

/// Which of the stored metrics came from a 0/0 ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UndefinedFlags {
    pub accuracy: bool,
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub undefined: UndefinedFlags,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 = 2pr/(p+r),
/// accuracy = (tp+tn)/total; 0/0 yields 0 with the undefined flag set.
pub fn compute_metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let (accuracy, acc_undef) = ratio(cm.true_pos + cm.true_neg, cm.total());
    let (precision, p_undef) = ratio(cm.true_pos, cm.true_pos + cm.false_pos);
    let (recall, r_undef) = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    let (f1, f1_undef) = if p_undef || r_undef || precision + recall == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / (precision + recall), false)
    };
    MetricsReport {
        accuracy,
        precision,
        recall,
        f1,
        undefined: UndefinedFlags {
            accuracy: acc_undef,
            precision: p_undef,
            recall: r_undef,
            f1: f1_undef,
        },
    }
}

/// Fraction → percentage with two decimals, rounding half away from zero.
pub fn percent(fraction: f64) -> f64 {
    (fraction * 10_000.0).round() / 100.0
}

/// The `"89.14"` style rendering used in reports.
pub fn format_percent(fraction: f64) -> String {
    format!("{:.2}", percent(fraction))
}

impl MetricsReport {
    /// Human-readable lines in the fixed metric order.
    pub fn render(&self) -> String {
        let mark = |undef: bool| if undef { " (undefined: 0/0)" } else { "" };
        format!(
            "accuracy:  {}{}\nprecision: {}{}\nrecall:    {}{}\nf1:        {}{}",
            format_percent(self.accuracy),
            mark(self.undefined.accuracy),
            format_percent(self.precision),
            mark(self.undefined.precision),
            format_percent(self.recall),
            mark(self.undefined.recall),
            format_percent(self.f1),
            mark(self.undefined.f1),
        )
    }
}

/// Precision/recall/F1 with one specific label treated as positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub undefined: UndefinedFlags,
}

impl From<MetricsReport> for ClassMetrics {
    fn from(report: MetricsReport) -> Self {
        ClassMetrics {
            precision: report.precision,
            recall: report.recall,
            f1: report.f1,
            undefined: report.undefined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerClassReport {
    pub informative: ClassMetrics,
    pub uninformative: ClassMetrics,
}

impl PerClassReport {
    pub fn macro_f1(&self) -> f64 {
        (self.informative.f1 + self.uninformative.f1) / 2.0
    }

    pub fn class(&self, label: Label) -> &ClassMetrics {
        match label {
            Label::Informative => &self.informative,
            Label::Uninformative => &self.uninformative,
        }
    }

    pub fn render(&self) -> String {
        let row = |name: &str, m: &ClassMetrics| {
            format!(
                "{name:<15} precision {:>6}  recall {:>6}  f1 {:>6}",
                format_percent(m.precision),
                format_percent(m.recall),
                format_percent(m.f1)
            )
        };
        format!(
            "{}\n{}\nmacro-f1: {}",
            row("INFORMATIVE", &self.informative),
            row("UNINFORMATIVE", &self.uninformative),
            format_percent(self.macro_f1())
        )
    }
}

/// INFORMATIVE row straight from the matrix; UNINFORMATIVE row from the
/// transposed matrix (tn as its tp, fn as its fp, fp as its fn).
pub fn per_class_metrics(cm: &ConfusionMatrix) -> PerClassReport {
    let transposed = ConfusionMatrix::new(cm.true_neg, cm.false_neg, cm.false_pos, cm.true_pos);
    PerClassReport {
        informative: compute_metrics(cm).into(),
        uninformative: compute_metrics(&transposed).into(),
    }
}

/// Loads gold and prediction TSVs, joins them by id (order-independent),
/// and computes all reports. Every gold id must appear exactly once in the
/// prediction file; prediction rows for unknown ids are ignored.
pub fn score_prediction_file(
    gold_path: impl AsRef<Path>,
    pred_path: impl AsRef<Path>,
) -> Result<(ConfusionMatrix, MetricsReport, PerClassReport), EvalError> {
    let gold_split = load_tsv(gold_path, SplitName::Test)?;
    let pred_rows = match load_predictions(pred_path) {
        Err(DataError::DuplicateId { id, .. }) => {
            return Err(EvalError::DuplicatePrediction(id))
        }
        other => other?,
    };

    let mut predictions: HashMap<&str, Label> = HashMap::with_capacity(pred_rows.len());
    for (id, label) in &pred_rows {
        predictions.insert(id.as_str(), *label);
    }

    let mut gold = Vec::with_capacity(gold_split.rows.len());
    let mut pred = Vec::with_capacity(gold_split.rows.len());
    for row in &gold_split.rows {
        let gold_label =
            row.label.ok_or_else(|| EvalError::UnlabeledGold(row.id.clone()))?;
        let pred_label = predictions
            .get(row.id.as_str())
            .ok_or_else(|| EvalError::MissingPrediction(row.id.clone()))?;
        gold.push(gold_label);
        pred.push(*pred_label);
    }

    let cm = confusion_matrix(&gold, &pred)?;
    Ok((cm, compute_metrics(&cm), per_class_metrics(&cm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Informative as I, Uninformative as U};

    #[test]
    fn confusion_counts() {
        let cm = confusion_matrix(&[I, U], &[I, U]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 0, 0, 1));

        let cm = confusion_matrix(&[I, I, U], &[I, U, I]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 1, 1, 0));

        let cm = confusion_matrix(&[I, U], &[U, I]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(0, 1, 1, 0));
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(
            confusion_matrix(&[I], &[I, U]),
            Err(EvalError::LengthMismatch { gold: 1, pred: 2 })
        ));
        assert!(matches!(confusion_matrix(&[], &[]), Err(EvalError::Empty)));
    }

    #[test]
    fn reported_test_set_metrics() {
        // the reconstructed test-set matrix on the 944/1056 split
        let cm = ConfusionMatrix::new(874, 143, 70, 913);
        let report = compute_metrics(&cm);
        assert_eq!(format_percent(report.f1), "89.14");
        assert_eq!(format_percent(report.accuracy), "89.35");
        assert_eq!(format_percent(report.recall), "92.58");
        assert_eq!(format_percent(report.precision), "85.94");
        assert_eq!(report.undefined, UndefinedFlags::default());
    }

    #[test]
    fn perfect_predictions() {
        let cm = confusion_matrix(&[I, U, I], &[I, U, I]).unwrap();
        let report = compute_metrics(&cm);
        for v in [report.accuracy, report.precision, report.recall, report.f1] {
            assert_eq!(format_percent(v), "100.00");
        }
    }

    #[test]
    fn zero_over_zero_is_flagged() {
        let cm = ConfusionMatrix::new(0, 0, 0, 5);
        let report = compute_metrics(&cm);
        assert_eq!(report.precision, 0.0);
        assert_eq!(report.recall, 0.0);
        assert_eq!(report.f1, 0.0);
        assert!(report.undefined.precision);
        assert!(report.undefined.recall);
        assert!(report.undefined.f1);
        assert!(!report.undefined.accuracy);
        assert_eq!(format_percent(report.accuracy), "100.00");
    }

    #[test]
    fn f1_consistency_with_its_own_p_and_r() {
        let cm = ConfusionMatrix::new(874, 143, 70, 913);
        let r = compute_metrics(&cm);
        assert!((r.f1 - 2.0 * r.precision * r.recall / (r.precision + r.recall)).abs() < 1e-12);
    }

    #[test]
    fn per_class_rows() {
        let cm = ConfusionMatrix::new(874, 143, 70, 913);
        let per_class = per_class_metrics(&cm);
        let info = compute_metrics(&cm);
        assert_eq!(per_class.informative.precision, info.precision);
        assert_eq!(per_class.informative.recall, info.recall);
        assert_eq!(per_class.informative.f1, info.f1);
        assert_eq!(format_percent(per_class.uninformative.precision), "92.88");
        assert_eq!(format_percent(per_class.uninformative.recall), "86.46");
    }

    #[test]
    fn per_class_symmetric_matrix_has_identical_rows() {
        let cm = ConfusionMatrix::new(7, 3, 3, 7);
        let per_class = per_class_metrics(&cm);
        assert_eq!(per_class.informative, per_class.uninformative);
    }

    #[test]
    fn per_class_perfect_matrix_is_all_100() {
        let per_class = per_class_metrics(&ConfusionMatrix::new(1, 0, 0, 1));
        for m in [per_class.informative, per_class.uninformative] {
            assert_eq!(format_percent(m.precision), "100.00");
            assert_eq!(format_percent(m.recall), "100.00");
            assert_eq!(format_percent(m.f1), "100.00");
        }
    }

    #[test]
    fn percent_rounds_half_away_from_zero() {
        assert_eq!(format_percent(0.891_45), "89.15");
        assert_eq!(format_percent(0.891_449_9), "89.14");
        assert_eq!(format_percent(1.0), "100.00");
        assert_eq!(format_percent(0.0), "0.00");
        // 0.125% rounds away from zero to 0.13, not banker's 0.12
        assert_eq!(format_percent(0.001_25), "0.13");
    }
}

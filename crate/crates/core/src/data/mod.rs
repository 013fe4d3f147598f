//! Dataset I/O for the shared-task TSV schema, split handling, prediction
//! output, and the common `TWSF` model-file format.
//!
//! Dataset rows are `id<TAB>text` (unlabeled) or `id<TAB>text<TAB>label`;
//! an optional header row whose first cell is `Id` (case-insensitive) is
//! skipped. Literal TAB, newline and backslash inside the text field are
//! stored escaped (`\t`, `\n`, `\\`) and decoded on load, keeping the
//! format line-oriented and the write→load round trip exact.

mod model_file;

pub use model_file::{ModelFile, ModelFileError, TrainedModel, MAGIC, VERSION};

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::label::Label;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected 2 or 3 tab-separated columns, found {columns}")]
    ColumnCount { path: String, line: usize, columns: usize },
    #[error("{path}:{line}: unknown label {label:?} (expected INFORMATIVE or UNINFORMATIVE)")]
    UnknownLabel { path: String, line: usize, label: String },
    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId { path: String, line: usize, id: String },
    #[error("{path}:{line}: empty id")]
    EmptyId { path: String, line: usize },
    #[error("{path}:{line}: row in split {split} must be labeled")]
    MissingLabel { path: String, line: usize, split: SplitName },
    #[error("id {id:?} appears in both splits being merged")]
    IdCollision { id: String },
    #[error("duplicate id {id:?} in prediction rows")]
    DuplicatePredictionId { id: String },
}

/// One dataset row; test rows may be unlabeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTweet {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub name: SplitName,
    pub rows: Vec<LabeledTweet>,
}

impl DatasetSplit {
    /// (informative, uninformative, unlabeled) tallies.
    pub fn class_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for row in &self.rows {
            match row.label {
                Some(Label::Informative) => counts.0 += 1,
                Some(Label::Uninformative) => counts.1 += 1,
                None => counts.2 += 1,
            }
        }
        counts
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn decode_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some('\\') => out.push('\\'),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn encode_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            other => out.push(other),
        }
    }
    out
}

/// Loads a dataset TSV. Train and validation splits must be fully labeled;
/// test rows may omit the label column.
pub fn load_tsv(path: impl AsRef<Path>, name: SplitName) -> Result<DatasetSplit, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let io_err = |source| DataError::Io { path: display.clone(), source };
    let contents = fs::read_to_string(path).map_err(io_err)?;

    let mut rows = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (index, line) in contents.lines().enumerate() {
        let line_no = index + 1;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if index == 0 && cells[0].eq_ignore_ascii_case("id") {
            continue;
        }
        if cells.len() != 2 && cells.len() != 3 {
            return Err(DataError::ColumnCount {
                path: display,
                line: line_no,
                columns: cells.len(),
            });
        }
        let id = cells[0].to_string();
        if id.is_empty() {
            return Err(DataError::EmptyId { path: display, line: line_no });
        }
        if !seen.insert(id.clone()) {
            return Err(DataError::DuplicateId { path: display, line: line_no, id });
        }
        let label = match cells.get(2) {
            Some(raw) => Some(raw.parse::<Label>().map_err(|e| DataError::UnknownLabel {
                path: display.clone(),
                line: line_no,
                label: e.0,
            })?),
            None => None,
        };
        if label.is_none() && name != SplitName::Test {
            return Err(DataError::MissingLabel { path: display, line: line_no, split: name });
        }
        rows.push(LabeledTweet { id, text: decode_text(cells[1]), label });
    }
    Ok(DatasetSplit { name, rows })
}

/// Writes a dataset TSV with the `Id<TAB>Text[<TAB>Label]` header matching
/// the row shape, escaping text fields.
pub fn write_tsv(path: impl AsRef<Path>, split: &DatasetSplit) -> Result<(), DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let io_err = |source| DataError::Io { path: display.clone(), source };
    let labeled = split.rows.iter().any(|r| r.label.is_some());
    let mut out = String::new();
    out.push_str(if labeled { "Id\tText\tLabel\n" } else { "Id\tText\n" });
    for row in &split.rows {
        out.push_str(&row.id);
        out.push('\t');
        out.push_str(&encode_text(&row.text));
        if let Some(label) = row.label {
            out.push('\t');
            out.push_str(label.as_str());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err)
}

/// Concatenates two splits (a then b); their id sets must be disjoint.
pub fn merge_splits(a: DatasetSplit, b: DatasetSplit) -> Result<DatasetSplit, DataError> {
    let ids: std::collections::HashSet<&str> = a.rows.iter().map(|r| r.id.as_str()).collect();
    if let Some(row) = b.rows.iter().find(|r| ids.contains(r.id.as_str())) {
        return Err(DataError::IdCollision { id: row.id.clone() });
    }
    let mut rows = a.rows;
    rows.extend(b.rows);
    Ok(DatasetSplit { name: a.name, rows })
}

/// Loads a prediction file: `Id<TAB>Label` rows (the format written by
/// [`write_predictions`]), or full labeled dataset rows whose last column
/// is the label. The optional header row is skipped.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<(String, Label)>, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let contents = fs::read_to_string(path)
        .map_err(|source| DataError::Io { path: display.clone(), source })?;
    let mut rows = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (index, line) in contents.lines().enumerate() {
        let line_no = index + 1;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if index == 0 && cells[0].eq_ignore_ascii_case("id") {
            continue;
        }
        if cells.len() != 2 && cells.len() != 3 {
            return Err(DataError::ColumnCount {
                path: display,
                line: line_no,
                columns: cells.len(),
            });
        }
        let id = cells[0].to_string();
        if id.is_empty() {
            return Err(DataError::EmptyId { path: display, line: line_no });
        }
        if !seen.insert(id.clone()) {
            return Err(DataError::DuplicateId { path: display, line: line_no, id });
        }
        let label = cells[cells.len() - 1].parse::<Label>().map_err(|e| {
            DataError::UnknownLabel { path: display.clone(), line: line_no, label: e.0 }
        })?;
        rows.push((id, label));
    }
    Ok(rows)
}

/// Writes the prediction TSV bit-exactly: header `Id<TAB>Label`, one row
/// per prediction in input order, trailing newline.
pub fn write_predictions(
    path: impl AsRef<Path>,
    rows: &[(String, Label)],
) -> Result<(), DataError> {
    let mut seen = std::collections::HashSet::new();
    for (id, _) in rows {
        if !seen.insert(id.as_str()) {
            return Err(DataError::DuplicatePredictionId { id: id.clone() });
        }
    }
    let path = path.as_ref();
    let display = path.display().to_string();
    let io_err = |source| DataError::Io { path: display.clone(), source };
    let mut file = fs::File::create(path).map_err(io_err)?;
    let mut out = String::from("Id\tLabel\n");
    for (id, label) in rows {
        out.push_str(id);
        out.push('\t');
        out.push_str(label.as_str());
        out.push('\n');
    }
    file.write_all(out.as_bytes())
        .map_err(|source| DataError::Io { path: display.clone(), source })
}

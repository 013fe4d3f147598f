//! The two task labels. `INFORMATIVE` is the positive class everywhere:
//! in the confusion matrix, in the headline F1, and in the ±1 encoding the
//! linear SVM trains on.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Informative,
    Uninformative,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Informative, Label::Uninformative];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Informative => "INFORMATIVE",
            Label::Uninformative => "UNINFORMATIVE",
        }
    }

    /// ±1 encoding used by the hinge loss: INFORMATIVE ↦ +1.
    pub fn sign(self) -> f64 {
        match self {
            Label::Informative => 1.0,
            Label::Uninformative => -1.0,
        }
    }

    /// Inverse of [`Label::sign`]; zero maps to INFORMATIVE (documented tie rule).
    pub fn from_decision(value: f64) -> Label {
        if value >= 0.0 {
            Label::Informative
        } else {
            Label::Uninformative
        }
    }

    /// Class index used by the CNN softmax head: INFORMATIVE is index 0.
    pub fn index(self) -> usize {
        match self {
            Label::Informative => 0,
            Label::Uninformative => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Error for label strings that are not exactly `INFORMATIVE` or `UNINFORMATIVE`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseLabelError(pub String);

impl fmt::Display for ParseLabelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown label {:?} (expected INFORMATIVE or UNINFORMATIVE)", self.0)
    }
}

impl std::error::Error for ParseLabelError {}

impl FromStr for Label {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "INFORMATIVE" => Ok(Label::Informative),
            "UNINFORMATIVE" => Ok(Label::Uninformative),
            other => Err(ParseLabelError(other.to_string())),
        }
    }
}

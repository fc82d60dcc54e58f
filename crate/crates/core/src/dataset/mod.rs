//! HinGE-format records, target derivation, validation and splits.
//!
//! Each input row describes one synthetic Hinglish sentence together with the
//! English-Hindi pair it was generated from. Pair columns repeat across the
//! rows that share a `pair_id`; the first occurrence wins and later rows that
//! disagree with it are reported as conflicts.

mod labels;
mod parse;
mod split;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use labels::{
    audit_labels, compute_average_rating, compute_disagreement, label_records, LabelAudit, LabelError,
    LabelMismatch, MAX_RATING, MIN_RATING,
};
pub use parse::{
    parse_hinge, parse_hinge_str, DataFormat, DatasetError, MalformedRow, PairConflict, ParsedDataset,
    CSV_COLUMNS,
};
pub use split::{split_dataset, DatasetSplit, SplitError, SplitFractions, SplitPart};
pub use validate::{validate_dataset, GeneratorCounts, ValidationReport, Violation, ViolationKind};

/// Counts of the published HinGE release.
pub const HINGE_PAIR_COUNT: usize = 1976;
pub const HINGE_HUMAN_SENTENCE_COUNT: usize = 6694;
pub const HINGE_SYNTHETIC_COUNT: usize = 2766;

/// One English-Hindi sentence pair with its human-written Hinglish references.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePairRecord {
    pub pair_id: String,
    pub english_text: String,
    pub hindi_text: String,
    pub human_hinglish: Vec<String>,
}

/// Algorithm that produced a synthetic sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    #[serde(rename = "WAC")]
    Wac,
    #[serde(rename = "PAC")]
    Pac,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Wac => "WAC",
            Generator::Pac => "PAC",
        })
    }
}

impl FromStr for Generator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "WAC" => Ok(Generator::Wac),
            "PAC" => Ok(Generator::Pac),
            other => Err(format!("unknown generator {other:?}")),
        }
    }
}

/// Label columns carried by the source file, kept for auditing only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvidedLabels {
    pub average_rating: Option<u8>,
    pub disagreement: Option<u8>,
}

/// One machine-generated Hinglish sentence and its two annotator ratings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticRecord {
    pub record_id: String,
    pub pair_id: String,
    pub generator: Generator,
    pub hinglish_text: String,
    pub rating1: u8,
    pub rating2: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provided: Option<ProvidedLabels>,
}

/// A synthetic record with both targets recomputed from its ratings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub record: SyntheticRecord,
    pub average_rating: u8,
    pub disagreement: u8,
}

impl LabeledRecord {
    /// Natural-scale label for `task`.
    pub fn label(&self, task: crate::Task) -> u8 {
        match task {
            crate::Task::Rating => self.average_rating,
            crate::Task::Disagreement => self.disagreement,
        }
    }
}

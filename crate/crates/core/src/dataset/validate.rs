use serde::{Deserialize, Serialize};

use super::labels::{audit_labels, label_records, LabelAudit};
use super::parse::{MalformedRow, ParsedDataset};
use super::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    FewerThanTwoReferences,
    EmptyEnglish,
    EmptyHindi,
    EmptySyntheticText,
    ConflictingPair,
    UnresolvedPair,
    LabelMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// `pair_id` or `record_id` the finding is about.
    pub subject: String,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorCounts {
    #[serde(rename = "WAC")]
    pub wac: usize,
    #[serde(rename = "PAC")]
    pub pac: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pair_count: usize,
    pub human_sentence_count: usize,
    pub synthetic_count: usize,
    pub generator_counts: GeneratorCounts,
    pub malformed_row_count: usize,
    pub malformed_rows: Vec<MalformedRow>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub label_audit: LabelAudit,
}

impl ValidationReport {
    /// True when no row was rejected and no invariant was violated.
    pub fn is_clean(&self) -> bool {
        self.malformed_rows.is_empty() && self.violations.is_empty()
    }
}

pub fn validate_dataset(data: &ParsedDataset) -> ValidationReport {
    let mut report = ValidationReport {
        pair_count: data.pairs.len(),
        human_sentence_count: data.pairs.iter().map(|p| p.human_hinglish.len()).sum(),
        synthetic_count: data.synthetic.len(),
        malformed_rows: data.malformed.clone(),
        ..ValidationReport::default()
    };
    let mut push = |kind, subject: &str, detail: String| {
        report.violations.push(Violation { kind, subject: subject.to_string(), detail })
    };

    for pair in &data.pairs {
        let n = pair.human_hinglish.len();
        if n < 2 {
            push(
                ViolationKind::FewerThanTwoReferences,
                &pair.pair_id,
                format!("fewer than 2 references ({n} human Hinglish sentences)"),
            );
        }
        if pair.english_text.trim().is_empty() {
            push(ViolationKind::EmptyEnglish, &pair.pair_id, "empty English sentence".into());
        }
        if pair.hindi_text.trim().is_empty() {
            push(ViolationKind::EmptyHindi, &pair.pair_id, "empty Hindi sentence".into());
        }
    }
    for conflict in &data.conflicts {
        push(
            ViolationKind::ConflictingPair,
            &conflict.pair_id,
            format!("line {} repeats the pair with a different {}", conflict.line, conflict.field),
        );
    }

    let pair_index = data.pair_index();
    for record in &data.synthetic {
        if !pair_index.contains_key(record.pair_id.as_str()) {
            push(
                ViolationKind::UnresolvedPair,
                &record.record_id,
                format!("pair_id {:?} not found", record.pair_id),
            );
        }
        if record.hinglish_text.trim().is_empty() {
            push(ViolationKind::EmptySyntheticText, &record.record_id, "empty synthetic sentence".into());
        }
    }

    for record in &data.synthetic {
        match record.generator {
            Generator::Wac => report.generator_counts.wac += 1,
            Generator::Pac => report.generator_counts.pac += 1,
        }
    }

    // Parsed ratings are range-checked already, so labelling cannot fail.
    if let Ok(labeled) = label_records(&data.synthetic) {
        report.label_audit = audit_labels(&labeled);
    }
    for m in &report.label_audit.mismatches {
        report.violations.push(Violation {
            kind: ViolationKind::LabelMismatch,
            subject: m.record_id.clone(),
            detail: format!("{:?} column says {}, recomputed {}", m.column, m.provided, m.recomputed),
        });
    }
    report.malformed_row_count = report.malformed_rows.len();
    report.violation_count = report.violations.len();
    report
}

use serde::{Deserialize, Serialize};

use super::{LabeledRecord, SyntheticRecord};

pub const MIN_RATING: u8 = 1;
pub const MAX_RATING: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("rating {0} outside [{MIN_RATING}, {MAX_RATING}]")]
    OutOfRange(i64),
}

fn check(r: i64) -> Result<u8, LabelError> {
    if (i64::from(MIN_RATING)..=i64::from(MAX_RATING)).contains(&r) {
        Ok(r as u8)
    } else {
        Err(LabelError::OutOfRange(r))
    }
}

/// Mean of two ratings rounded half up, so 5.5 becomes 6.
pub fn compute_average_rating(r1: i64, r2: i64) -> Result<u8, LabelError> {
    let (a, b) = (check(r1)?, check(r2)?);
    Ok((a + b).div_ceil(2))
}

/// Absolute difference of two ratings.
pub fn compute_disagreement(r1: i64, r2: i64) -> Result<u8, LabelError> {
    let (a, b) = (check(r1)?, check(r2)?);
    Ok(a.abs_diff(b))
}

/// Derives both targets for every record, preserving order.
pub fn label_records(synthetic: &[SyntheticRecord]) -> Result<Vec<LabeledRecord>, LabelError> {
    synthetic
        .iter()
        .map(|record| {
            let (r1, r2) = (i64::from(record.rating1), i64::from(record.rating2));
            Ok(LabeledRecord {
                average_rating: compute_average_rating(r1, r2)?,
                disagreement: compute_disagreement(r1, r2)?,
                record: record.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    AverageRating,
    Disagreement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMismatch {
    pub record_id: String,
    pub column: LabelColumn,
    pub provided: u8,
    pub recomputed: u8,
}

/// Agreement between recomputed targets and the columns shipped with the data.
/// Recomputed values are what training uses; this only reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelAudit {
    pub average_rating_checked: usize,
    pub average_rating_matched: usize,
    pub disagreement_checked: usize,
    pub disagreement_matched: usize,
    pub mismatches: Vec<LabelMismatch>,
}

impl LabelAudit {
    /// Fraction of rows whose provided average matches; `None` if the column is absent.
    pub fn average_rating_agreement(&self) -> Option<f64> {
        (self.average_rating_checked > 0)
            .then(|| self.average_rating_matched as f64 / self.average_rating_checked as f64)
    }

    pub fn disagreement_agreement(&self) -> Option<f64> {
        (self.disagreement_checked > 0)
            .then(|| self.disagreement_matched as f64 / self.disagreement_checked as f64)
    }
}

pub fn audit_labels(records: &[LabeledRecord]) -> LabelAudit {
    let mut audit = LabelAudit::default();
    for labeled in records {
        let Some(provided) = labeled.record.provided else {
            continue;
        };
        let id = &labeled.record.record_id;
        if let Some(avg) = provided.average_rating {
            audit.average_rating_checked += 1;
            if avg == labeled.average_rating {
                audit.average_rating_matched += 1;
            } else {
                audit.mismatches.push(LabelMismatch {
                    record_id: id.clone(),
                    column: LabelColumn::AverageRating,
                    provided: avg,
                    recomputed: labeled.average_rating,
                });
            }
        }
        if let Some(dis) = provided.disagreement {
            audit.disagreement_checked += 1;
            if dis == labeled.disagreement {
                audit.disagreement_matched += 1;
            } else {
                audit.mismatches.push(LabelMismatch {
                    record_id: id.clone(),
                    column: LabelColumn::Disagreement,
                    provided: dis,
                    recomputed: labeled.disagreement,
                });
            }
        }
    }
    audit
}

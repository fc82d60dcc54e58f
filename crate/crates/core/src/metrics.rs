//! Evaluation metrics over integer class labels: F1 (micro, macro,
//! weighted), unweighted Cohen's kappa and MSE on the label scale.
//!
//! Precision, recall and F1 of a class with a zero denominator are 0.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::Task;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("label lists differ in length: {true_len} true vs {pred_len} predicted")]
    LengthMismatch { true_len: usize, pred_len: usize },
    #[error("cannot evaluate an empty label list")]
    EmptyInput,
    #[error("label {label} outside [{lo}, {hi}]")]
    LabelOutOfRange { label: u8, lo: u8, hi: u8 },
    #[error("chance agreement is 1 while observed agreement is {observed}")]
    DegenerateDistribution { observed: f64 },
}

/// `counts[i * k + j]` is the number of items with true class `i` and predicted class `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    offset: u8,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn offset(&self) -> u8 {
        self.offset
    }

    /// Count for natural-scale labels `(truth, predicted)`.
    pub fn cell(&self, truth: u8, predicted: u8) -> u64 {
        let i = usize::from(truth - self.offset);
        let j = usize::from(predicted - self.offset);
        self.counts[i * self.k + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn at(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k + j]
    }

    fn row_sum(&self, i: usize) -> u64 {
        (0..self.k).map(|j| self.at(i, j)).sum()
    }

    fn col_sum(&self, j: usize) -> u64 {
        (0..self.k).map(|i| self.at(i, j)).sum()
    }

    fn diagonal(&self) -> u64 {
        (0..self.k).map(|i| self.at(i, i)).sum()
    }

    /// Per-class F1 with the 0/0 = 0 convention.
    pub fn per_class_f1(&self) -> Vec<f64> {
        (0..self.k)
            .map(|c| {
                let tp = self.at(c, c) as f64;
                let predicted = self.col_sum(c) as f64;
                let actual = self.row_sum(c) as f64;
                let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
                let recall = if actual > 0.0 { tp / actual } else { 0.0 };
                if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

fn check_lengths(y_true: &[u8], y_pred: &[u8]) -> Result<(), MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch { true_len: y_true.len(), pred_len: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// Counts `(truth, prediction)` pairs over labels `offset..offset + k`.
pub fn confusion_matrix(
    y_true: &[u8],
    y_pred: &[u8],
    k: usize,
    offset: u8,
) -> Result<ConfusionMatrix, MetricsError> {
    check_lengths(y_true, y_pred)?;
    let hi = (usize::from(offset) + k - 1).min(255) as u8;
    let index = |label: u8| {
        if label < offset || usize::from(label - offset) >= k {
            Err(MetricsError::LabelOutOfRange { label, lo: offset, hi })
        } else {
            Ok(usize::from(label - offset))
        }
    };
    let mut counts = vec![0u64; k * k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        counts[index(t)? * k + index(p)?] += 1;
    }
    Ok(ConfusionMatrix { k, offset, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Averaging {
    /// Global TP over all items; equals accuracy for single-label data.
    Micro,
    /// Unweighted mean over all `k` classes, absent ones included.
    Macro,
    /// Mean weighted by true-class support.
    Weighted,
}

pub fn f1_score(cm: &ConfusionMatrix, averaging: F1Averaging) -> f64 {
    let n = cm.total() as f64;
    if n == 0.0 {
        return 0.0;
    }
    match averaging {
        F1Averaging::Micro => cm.diagonal() as f64 / n,
        F1Averaging::Macro => cm.per_class_f1().iter().sum::<f64>() / cm.k as f64,
        F1Averaging::Weighted => {
            cm.per_class_f1().iter().enumerate().map(|(c, f1)| cm.row_sum(c) as f64 * f1).sum::<f64>() / n
        }
    }
}

/// Unweighted Cohen's kappa. When every item falls in one cell the
/// statistic is undefined and 0 is returned.
pub fn cohens_kappa(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let n = cm.total() as f64;
    if n == 0.0 {
        return Err(MetricsError::EmptyInput);
    }
    let observed = cm.diagonal() as f64 / n;
    let expected: f64 = (0..cm.k).map(|c| (cm.row_sum(c) as f64 / n) * (cm.col_sum(c) as f64 / n)).sum();
    if expected == 1.0 {
        return if observed == 1.0 {
            Ok(0.0)
        } else {
            Err(MetricsError::DegenerateDistribution { observed })
        };
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Mean squared difference of natural-scale labels.
pub fn mse(y_true: &[u8], y_pred: &[u8]) -> Result<f64, MetricsError> {
    check_lengths(y_true, y_pred)?;
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(&t, &p)| {
            let d = f64::from(t) - f64::from(p);
            d * d
        })
        .sum();
    Ok(sum / y_true.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: Task,
    pub n: usize,
    pub f1_micro: f64,
    pub f1_macro: f64,
    /// Headline score.
    pub f1_weighted: f64,
    pub cohens_kappa: f64,
    pub mse: f64,
}

impl MetricReport {
    pub fn headline_f1(&self) -> f64 {
        self.f1_weighted
    }

    /// Single-line JSON with metrics printed to six decimals.
    pub fn to_cli_json(&self) -> String {
        let mut s = String::new();
        write!(
            s,
            "{{\"task\":\"{}\",\"n\":{},\"f1_micro\":{:.6},\"f1_macro\":{:.6},\"f1_weighted\":{:.6},\"cohens_kappa\":{:.6},\"mse\":{:.6}}}",
            self.task, self.n, self.f1_micro, self.f1_macro, self.f1_weighted, self.cohens_kappa, self.mse
        )
        .expect("writing to a String");
        s
    }
}

/// All metrics for natural-scale labels of `task`.
pub fn evaluate(y_true: &[u8], y_pred: &[u8], task: Task) -> Result<MetricReport, MetricsError> {
    let cm = confusion_matrix(y_true, y_pred, Task::NUM_CLASSES, task.label_offset())?;
    Ok(MetricReport {
        task,
        n: y_true.len(),
        f1_micro: f1_score(&cm, F1Averaging::Micro),
        f1_macro: f1_score(&cm, F1Averaging::Macro),
        f1_weighted: f1_score(&cm, F1Averaging::Weighted),
        cohens_kappa: cohens_kappa(&cm)?,
        mse: mse(y_true, y_pred)?,
    })
}

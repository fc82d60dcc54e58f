use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabeledRecord;
use crate::Task;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("cannot split an empty record list")]
    EmptyInput,
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    InvalidFractions([f64; 3]),
}

/// Train / validation / test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions([f64; 3]);

impl SplitFractions {
    pub const DEFAULT: SplitFractions = SplitFractions([0.8, 0.0, 0.2]);

    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self, SplitError> {
        let parts = [train, validation, test];
        let ok = parts.iter().all(|f| f.is_finite() && *f >= 0.0)
            && (parts.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if ok {
            Ok(SplitFractions(parts))
        } else {
            Err(SplitError::InvalidFractions(parts))
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPart {
    Train,
    Validation,
    Test,
}

impl std::str::FromStr for SplitPart {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(SplitPart::Train),
            "validation" => Ok(SplitPart::Validation),
            "test" => Ok(SplitPart::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<LabeledRecord>,
    pub validation: Vec<LabeledRecord>,
    pub test: Vec<LabeledRecord>,
    pub seed: u64,
    pub fractions: SplitFractions,
}

impl DatasetSplit {
    pub fn part(&self, part: SplitPart) -> &[LabeledRecord] {
        match part {
            SplitPart::Train => &self.train,
            SplitPart::Validation => &self.validation,
            SplitPart::Test => &self.test,
        }
    }
}

/// Per-class counts for each split part.
///
/// Every class gets the floor of its proportional share, plus one record in
/// each non-empty part when it has at least three members. Leftover records
/// go to the (class, part) cells with the largest fractional remainder while
/// the part is still below its global largest-remainder target.
pub(crate) fn allocate(class_sizes: &[usize], fractions: [f64; 3]) -> Vec<[usize; 3]> {
    let total: usize = class_sizes.iter().sum();
    let targets = largest_remainder(total, fractions);
    let active = fractions.map(|f| f > 0.0);
    let n_active = active.iter().filter(|a| **a).count();

    let mut alloc: Vec<[usize; 3]> = Vec::with_capacity(class_sizes.len());
    let mut remainders = Vec::new();
    for (c, &n) in class_sizes.iter().enumerate() {
        let mut a = [0usize; 3];
        for k in 0..3 {
            let quota = fractions[k] * n as f64;
            a[k] = quota.floor() as usize;
            if active[k] && n >= 3.max(n_active) {
                a[k] = a[k].max(1);
            }
        }
        // Forced minima can overshoot; take back from the largest cells.
        while a.iter().sum::<usize>() > n {
            let k = (0..3).max_by_key(|&k| (a[k], std::cmp::Reverse(k))).unwrap();
            a[k] -= 1;
        }
        for k in 0..3 {
            if active[k] {
                let rem = fractions[k] * n as f64 - a[k] as f64;
                remainders.push((rem, c, k));
            }
        }
        alloc.push(a);
    }

    let mut used = [0usize; 3];
    for a in &alloc {
        for k in 0..3 {
            used[k] += a[k];
        }
    }
    remainders.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    for &(_, c, k) in &remainders {
        if alloc[c].iter().sum::<usize>() < class_sizes[c] && used[k] < targets[k] {
            alloc[c][k] += 1;
            used[k] += 1;
        }
    }
    // Anything still unplaced goes where the target deficit is largest.
    for (c, &n) in class_sizes.iter().enumerate() {
        while alloc[c].iter().sum::<usize>() < n {
            let k = (0..3)
                .filter(|&k| active[k])
                .max_by_key(|&k| (targets[k] as i64 - used[k] as i64, std::cmp::Reverse(k)))
                .unwrap_or(0);
            alloc[c][k] += 1;
            used[k] += 1;
        }
    }
    alloc
}

fn largest_remainder(total: usize, fractions: [f64; 3]) -> [usize; 3] {
    let mut sizes = fractions.map(|f| (f * total as f64).floor() as usize);
    let mut order: Vec<usize> = (0..3).filter(|&k| fractions[k] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let ra = fractions[a] * total as f64 - sizes[a] as f64;
        let rb = fractions[b] * total as f64 - sizes[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut i = 0;
    while sizes.iter().sum::<usize>() < total && !order.is_empty() {
        sizes[order[i % order.len()]] += 1;
        i += 1;
    }
    sizes
}

/// Seeded split stratified on `task`'s label. Each part keeps the input order
/// of its records.
pub fn split_dataset(
    records: &[LabeledRecord],
    task: Task,
    seed: u64,
    fractions: SplitFractions,
) -> Result<DatasetSplit, SplitError> {
    if records.is_empty() {
        return Err(SplitError::EmptyInput);
    }
    let mut by_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_class.entry(r.label(task)).or_default().push(i);
    }
    let sizes: Vec<usize> = by_class.values().map(Vec::len).collect();
    let alloc = allocate(&sizes, fractions.as_array());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![SplitPart::Train; records.len()];
    for (members, counts) in by_class.into_values().zip(alloc) {
        let mut members = members;
        members.shuffle(&mut rng);
        let (train, rest) = members.split_at(counts[0]);
        let (validation, test) = rest.split_at(counts[1]);
        for (part, idxs) in
            [(SplitPart::Train, train), (SplitPart::Validation, validation), (SplitPart::Test, test)]
        {
            for &i in idxs {
                assignment[i] = part;
            }
        }
    }

    let mut split =
        DatasetSplit { train: Vec::new(), validation: Vec::new(), test: Vec::new(), seed, fractions };
    for (record, part) in records.iter().zip(assignment) {
        match part {
            SplitPart::Train => split.train.push(record.clone()),
            SplitPart::Validation => split.validation.push(record.clone()),
            SplitPart::Test => split.test.push(record.clone()),
        }
    }
    Ok(split)
}

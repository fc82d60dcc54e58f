//! Feature assembly: one 3072-wide row per synthetic record.
//!
//! Row layout is fixed as `[syn-EN | syn-HI | humAvg-EN | humAvg-HI]`, each
//! segment 768 wide. Human segments are the elementwise mean over all human
//! references of the record's pair, summed in f64 in `human_index` order.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledRecord;
use crate::embeddings::{
    clsv, Context, EmbeddingError, EmbeddingKey, EmbeddingStore, EmbeddingVector, Pairing, Source,
    EMBEDDING_DIM,
};
use crate::Task;

pub const SEGMENTS: usize = 4;
pub const FUSED_DIM: usize = SEGMENTS * EMBEDDING_DIM;

#[derive(Debug, thiserror::Error)]
pub enum FusionError {
    #[error("no human vectors for pair {pair_id:?} ({context:?})")]
    NoHumanVectors { pair_id: String, context: Context },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("{} vector(s) missing: {}", .0.len(), .0.join(", "))]
    MissingKeys(Vec<String>),
    #[error("label {label} of {record_id:?} is not valid for the {task} task")]
    InvalidLabel { record_id: String, label: u8, task: Task },
    #[error("labels sidecar does not match the matrix: {0}")]
    LabelMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("labels sidecar {path}: {source}")]
    Sidecar {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedFeature {
    pub record_id: String,
    pub values: Vec<f32>,
}

impl FusedFeature {
    /// Segment `i` of the row: 0 syn-EN, 1 syn-HI, 2 humAvg-EN, 3 humAvg-HI.
    pub fn segment(&self, i: usize) -> &[f32] {
        &self.values[i * EMBEDDING_DIM..(i + 1) * EMBEDDING_DIM]
    }
}

/// Design matrix with positionally aligned natural-scale labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub task: Task,
    pub rows: Vec<FusedFeature>,
    pub labels: Vec<u8>,
}

impl FeatureMatrix {
    pub fn empty(task: Task) -> Self {
        FeatureMatrix { task, rows: Vec::new(), labels: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Width of every row; `FUSED_DIM` for an empty matrix.
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(FUSED_DIM, |r| r.values.len())
    }

    /// 0-based class indices of the labels.
    pub fn class_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .map(|&l| self.task.class_index(l).expect("labels validated on construction"))
            .collect()
    }

    pub fn to_array(&self) -> Array2<f32> {
        let dim = self.dim();
        let mut out = Array2::zeros((self.rows.len(), dim));
        for (mut dst, row) in out.rows_mut().into_iter().zip(&self.rows) {
            dst.assign(&ndarray::ArrayView1::from(&row.values[..]));
        }
        out
    }

    pub fn record_ids(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.record_id.as_str())
    }
}

fn mean_of(vectors: &[&EmbeddingVector], dim: usize) -> EmbeddingVector {
    let mut acc = vec![0f64; dim];
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v.as_slice()) {
            *a += f64::from(*x);
        }
    }
    let n = vectors.len() as f64;
    EmbeddingVector::new(acc.into_iter().map(|a| (a / n) as f32).collect())
        .expect("mean of finite vectors is finite")
}

/// Mean of the human vectors of `pair_id` for one context.
pub fn average_human_vectors(
    store: &EmbeddingStore,
    pair_id: &str,
    context: Context,
) -> Result<EmbeddingVector, FusionError> {
    let mut found: Vec<(usize, &EmbeddingVector)> = store
        .pairing(Pairing { source: Source::Hum, context })
        .filter(|(k, _)| k.owner_id == pair_id)
        .map(|(k, v)| (k.human_index.unwrap_or(0), v))
        .collect();
    if found.is_empty() {
        return Err(FusionError::NoHumanVectors { pair_id: pair_id.to_string(), context });
    }
    found.sort_by_key(|(i, _)| *i);
    let vectors: Vec<_> = found.into_iter().map(|(_, v)| v).collect();
    Ok(mean_of(&vectors, store.dim()))
}

/// Concatenates the four segments without any scaling.
pub fn assemble_feature(
    record: &LabeledRecord,
    syn_en: &EmbeddingVector,
    syn_hi: &EmbeddingVector,
    hum_en_avg: &EmbeddingVector,
    hum_hi_avg: &EmbeddingVector,
) -> Result<FusedFeature, FusionError> {
    let parts = [syn_en, syn_hi, hum_en_avg, hum_hi_avg];
    if let Some(bad) = parts.iter().find(|v| v.len() != EMBEDDING_DIM) {
        return Err(FusionError::DimMismatch { expected: EMBEDDING_DIM, found: bad.len() });
    }
    let mut values = Vec::with_capacity(FUSED_DIM);
    for p in parts {
        values.extend_from_slice(p.as_slice());
    }
    Ok(FusedFeature { record_id: record.record.record_id.clone(), values })
}

/// Averages every (pair, context) group of a human store in one pass.
fn human_averages(store: &EmbeddingStore) -> HashMap<(&str, Context), EmbeddingVector> {
    let mut groups: HashMap<(&str, Context), Vec<(usize, &EmbeddingVector)>> = HashMap::new();
    for (key, vector) in store.iter().filter(|(k, _)| k.source == Source::Hum) {
        groups
            .entry((key.owner_id.as_str(), key.context))
            .or_default()
            .push((key.human_index.unwrap_or(0), vector));
    }
    groups
        .into_iter()
        .map(|(group, mut members)| {
            members.sort_by_key(|(i, _)| *i);
            let vectors: Vec<_> = members.into_iter().map(|(_, v)| v).collect();
            (group, mean_of(&vectors, store.dim()))
        })
        .collect()
}

/// One row per record, in input order, with labels chosen by `task`.
/// Every absent vector across all records is reported at once.
pub fn build_feature_matrix(
    records: &[LabeledRecord],
    syn_store: &EmbeddingStore,
    hum_store: &EmbeddingStore,
    task: Task,
) -> Result<FeatureMatrix, FusionError> {
    for store in [syn_store, hum_store] {
        if store.dim() != EMBEDDING_DIM {
            return Err(FusionError::DimMismatch { expected: EMBEDDING_DIM, found: store.dim() });
        }
    }
    let averages = human_averages(hum_store);
    let mut missing = Vec::new();
    let mut matrix = FeatureMatrix::empty(task);
    for labeled in records {
        let rec = &labeled.record;
        let syn_en_key = EmbeddingKey::synthetic(rec.record_id.clone(), Context::En);
        let syn_hi_key = EmbeddingKey::synthetic(rec.record_id.clone(), Context::Hi);
        let syn_en = syn_store.get(&syn_en_key);
        let syn_hi = syn_store.get(&syn_hi_key);
        let hum_en = averages.get(&(rec.pair_id.as_str(), Context::En));
        let hum_hi = averages.get(&(rec.pair_id.as_str(), Context::Hi));
        if syn_en.is_none() {
            missing.push(syn_en_key.to_string());
        }
        if syn_hi.is_none() {
            missing.push(syn_hi_key.to_string());
        }
        if hum_en.is_none() {
            missing.push(format!("hum:{}:*:en", rec.pair_id));
        }
        if hum_hi.is_none() {
            missing.push(format!("hum:{}:*:hi", rec.pair_id));
        }
        let (Some(syn_en), Some(syn_hi), Some(hum_en), Some(hum_hi)) = (syn_en, syn_hi, hum_en, hum_hi)
        else {
            continue;
        };
        let label = labeled.label(task);
        if !task.is_valid_label(label) {
            return Err(FusionError::InvalidLabel { record_id: rec.record_id.clone(), label, task });
        }
        matrix.rows.push(assemble_feature(labeled, syn_en, syn_hi, hum_en, hum_hi)?);
        matrix.labels.push(label);
    }
    if !missing.is_empty() {
        missing.dedup();
        return Err(FusionError::MissingKeys(missing));
    }
    Ok(matrix)
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelSidecar {
    task: Task,
    labels: BTreeMap<String, u8>,
}

/// `matrix.clsv` -> `matrix.labels.json`
pub fn labels_path(matrix_path: &Path) -> PathBuf {
    matrix_path.with_extension("labels.json")
}

/// Writes the rows as CLSV keyed by `record_id` plus a labels sidecar.
pub fn save_feature_matrix(matrix: &FeatureMatrix, path: &Path) -> Result<(), FusionError> {
    let bytes =
        clsv::encode(matrix.dim(), matrix.rows.iter().map(|r| (r.record_id.as_str(), r.values.as_slice())))?;
    std::fs::write(path, bytes).map_err(|source| FusionError::Io { path: path.into(), source })?;
    let sidecar = LabelSidecar {
        task: matrix.task,
        labels: matrix.rows.iter().map(|r| r.record_id.clone()).zip(matrix.labels.iter().copied()).collect(),
    };
    let side_path = labels_path(path);
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|source| FusionError::Sidecar { path: side_path.clone(), source })?;
    std::fs::write(&side_path, json + "\n").map_err(|source| FusionError::Io { path: side_path, source })
}

/// Reads a matrix written by [`save_feature_matrix`]; rows come back sorted by `record_id`.
pub fn load_feature_matrix(path: &Path) -> Result<FeatureMatrix, FusionError> {
    let bytes = std::fs::read(path).map_err(|source| FusionError::Io { path: path.into(), source })?;
    let contents = clsv::decode(&bytes, Some(FUSED_DIM))?;
    let side_path = labels_path(path);
    let text = std::fs::read_to_string(&side_path)
        .map_err(|source| FusionError::Io { path: side_path.clone(), source })?;
    let sidecar: LabelSidecar =
        serde_json::from_str(&text).map_err(|source| FusionError::Sidecar { path: side_path, source })?;
    if sidecar.labels.len() != contents.records.len() {
        return Err(FusionError::LabelMismatch(format!(
            "{} rows but {} labels",
            contents.records.len(),
            sidecar.labels.len()
        )));
    }
    let mut matrix = FeatureMatrix::empty(sidecar.task);
    for (record_id, values) in contents.records {
        let label = *sidecar
            .labels
            .get(&record_id)
            .ok_or_else(|| FusionError::LabelMismatch(format!("no label for {record_id:?}")))?;
        if !sidecar.task.is_valid_label(label) {
            return Err(FusionError::InvalidLabel { record_id, label, task: sidecar.task });
        }
        matrix.rows.push(FusedFeature { record_id, values });
        matrix.labels.push(label);
    }
    Ok(matrix)
}

//! Line-delimited JSON interchange: `{"key": "...", "values": [...]}` per line.
//!
//! Values are written with the shortest decimal that parses back to the same
//! f32, so a CLSV -> JSONL -> CLSV trip is lossless in practice. CLSV stays
//! the authoritative format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingKey, EmbeddingStore, EmbeddingVector};

#[derive(Serialize)]
struct LineOut<'a> {
    key: String,
    values: &'a [f32],
}

#[derive(Deserialize)]
struct LineIn {
    key: String,
    values: Vec<f32>,
}

pub fn encode_jsonl(store: &EmbeddingStore) -> String {
    let mut out = String::new();
    for (key, vector) in store.iter() {
        let line = LineOut { key: key.to_string(), values: vector.as_slice() };
        out.push_str(&serde_json::to_string(&line).expect("finite floats serialize"));
        out.push('\n');
    }
    out
}

/// Parses JSONL. Blank lines are skipped; the width comes from `expected_dim`.
pub fn decode_jsonl(text: &str, expected_dim: usize) -> Result<EmbeddingStore, EmbeddingError> {
    let mut store = EmbeddingStore::new(expected_dim);
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| EmbeddingError::MalformedLine { line: line_no, reason };
        let parsed: LineIn = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let key: EmbeddingKey = parsed.key.parse().map_err(|e: EmbeddingError| malformed(e.to_string()))?;
        if parsed.values.len() != expected_dim {
            return Err(malformed(format!("expected {expected_dim} values, found {}", parsed.values.len())));
        }
        let vector = EmbeddingVector::new(parsed.values).map_err(|e| malformed(e.to_string()))?;
        store.insert(key, vector).map_err(|e| malformed(e.to_string()))?;
    }
    Ok(store)
}

pub fn read_jsonl(path: &Path, expected_dim: usize) -> Result<EmbeddingStore, EmbeddingError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io { path: path.into(), source })?;
    decode_jsonl(&text, expected_dim)
}

pub fn write_jsonl(store: &EmbeddingStore, path: &Path) -> Result<(), EmbeddingError> {
    std::fs::write(path, encode_jsonl(store))
        .map_err(|source| EmbeddingError::Io { path: path.into(), source })
}

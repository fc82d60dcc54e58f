//! 768-dim CLS vectors: key scheme, stores, file formats and providers.
//!
//! Four pairings feed the classifier. Sentence B is always Hinglish; sentence
//! A is the English or Hindi side of the pair:
//!
//! | pairing | sentence A | sentence B          | key                          |
//! |---------|------------|---------------------|------------------------------|
//! | syn-en  | English    | synthetic Hinglish  | `syn:{record_id}:en`         |
//! | syn-hi  | Hindi      | synthetic Hinglish  | `syn:{record_id}:hi`         |
//! | hum-en  | English    | human reference `i` | `hum:{pair_id}:{i}:en`       |
//! | hum-hi  | Hindi      | human reference `i` | `hum:{pair_id}:{i}:hi`       |

pub mod clsv;
mod hash_embed;
mod jsonl;
mod key;
mod provider;
mod store;

use std::path::PathBuf;

pub use hash_embed::deterministic_embed;
pub use jsonl::{decode_jsonl, encode_jsonl, read_jsonl, write_jsonl};
pub use key::{Context, EmbeddingKey, Pairing, Source};
pub use provider::{pairing_requests, provide_embeddings, EmbeddingProvider, EmbeddingRequest};
pub use store::{read_clsv, write_clsv, EmbeddingStore, EmbeddingVector};

/// Width of a CLS vector.
pub const EMBEDDING_DIM: usize = 768;

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic bytes {0:02x?}, expected `CLSV`")]
    BadMagic([u8; 4]),
    #[error("unsupported CLSV version {0}")]
    UnsupportedVersion(u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("file truncated: needed {needed} more bytes at offset {offset}")]
    TruncatedFile { offset: usize, needed: usize },
    #[error("{0} unexpected bytes after the last record")]
    TrailingBytes(usize),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("invalid key {key:?}: {reason}")]
    InvalidKey { key: String, reason: String },
    #[error("key of {0} bytes exceeds the u16 length field")]
    KeyTooLong(usize),
    #[error("non-finite value at index {index} of {key:?}")]
    NonFiniteValue { key: String, index: usize },
    #[error("malformed JSONL line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("sentence B is empty")]
    EmptySentence,
    #[error("{} key(s) missing from embedding file: {}", .0.len(), .0.join(", "))]
    MissingKeys(Vec<String>),
}

//! Quality estimation for synthetically generated code-mixed (Hinglish) sentences.
//!
//! The pipeline reads HinGE-format data, obtains 768-dim CLS vectors for four
//! sentence pairings, fuses them into a 3072-dim feature row per synthetic
//! sentence, and trains a dense classifier for each of two targets: the
//! annotators' average rating and their disagreement.
//!
//! ```text
//! dataset --> embeddings --> fusion --> nn --> metrics
//! ```
//!
//! Every stage hands off through files (CLSV vectors, label sidecars, MLPC
//! checkpoints) so an external encoder can replace the built-in deterministic
//! embedder without touching the rest.

pub mod cli;
pub mod dataset;
pub mod embeddings;
pub mod fusion;
pub mod metrics;
pub mod nn;
mod task;

pub use task::{ParseTaskError, Task};

use std::collections::HashSet;
use std::path::PathBuf;

use super::{
    deterministic_embed, read_clsv, Context, EmbeddingError, EmbeddingKey, EmbeddingStore, Pairing, Source,
    EMBEDDING_DIM,
};
use crate::dataset::ParsedDataset;

/// Where CLS vectors come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingProvider {
    /// A CLSV file exported by an encoder.
    File(PathBuf),
    /// The built-in hash embedder.
    Deterministic(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingRequest {
    pub key: EmbeddingKey,
    pub sentence_a: String,
    pub sentence_b: String,
}

/// One vector per request, either embedded or looked up.
pub fn provide_embeddings(
    provider: &EmbeddingProvider,
    requests: &[EmbeddingRequest],
) -> Result<EmbeddingStore, EmbeddingError> {
    let mut seen = HashSet::with_capacity(requests.len());
    for r in requests {
        if !seen.insert(&r.key) {
            return Err(EmbeddingError::DuplicateKey(r.key.to_string()));
        }
    }
    let mut out = EmbeddingStore::new(EMBEDDING_DIM);
    match provider {
        EmbeddingProvider::Deterministic(seed) => {
            for r in requests {
                out.insert(r.key.clone(), deterministic_embed(&r.sentence_a, &r.sentence_b, *seed)?)?;
            }
        }
        EmbeddingProvider::File(path) => {
            let file = read_clsv(path, EMBEDDING_DIM)?;
            let missing: Vec<String> =
                requests.iter().filter(|r| !file.contains(&r.key)).map(|r| r.key.to_string()).collect();
            if !missing.is_empty() {
                return Err(EmbeddingError::MissingKeys(missing));
            }
            for r in requests {
                let vector = file.get(&r.key).expect("presence checked").clone();
                out.insert(r.key.clone(), vector)?;
            }
        }
    }
    Ok(out)
}

/// Requests for one pairing over every record of `data`.
///
/// Synthetic pairings need the record's pair; records whose pair is unknown
/// are skipped here and reported by validation.
pub fn pairing_requests(data: &ParsedDataset, pairing: Pairing) -> Vec<EmbeddingRequest> {
    let side = |pair: &crate::dataset::SentencePairRecord| match pairing.context {
        Context::En => pair.english_text.clone(),
        Context::Hi => pair.hindi_text.clone(),
    };
    match pairing.source {
        Source::Syn => {
            let index = data.pair_index();
            data.synthetic
                .iter()
                .filter_map(|rec| {
                    let pair = &data.pairs[*index.get(rec.pair_id.as_str())?];
                    Some(EmbeddingRequest {
                        key: EmbeddingKey::synthetic(rec.record_id.clone(), pairing.context),
                        sentence_a: side(pair),
                        sentence_b: rec.hinglish_text.clone(),
                    })
                })
                .collect()
        }
        Source::Hum => data
            .pairs
            .iter()
            .flat_map(|pair| {
                pair.human_hinglish.iter().enumerate().map(move |(i, text)| EmbeddingRequest {
                    key: EmbeddingKey::human(pair.pair_id.clone(), i, pairing.context),
                    sentence_a: side(pair),
                    sentence_b: text.clone(),
                })
            })
            .collect(),
    }
}

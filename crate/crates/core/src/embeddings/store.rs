use std::collections::BTreeMap;
use std::path::Path;

use super::{clsv, EmbeddingError, EmbeddingKey, Pairing, EMBEDDING_DIM};

/// A finite f32 vector; its width is checked by the store that holds it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, EmbeddingError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFiniteValue { key: String::new(), index });
        }
        Ok(EmbeddingVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        EmbeddingVector(vec![0.0; dim])
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    /// Exact bit pattern comparison, so `-0.0 != 0.0`.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl AsRef<[f32]> for EmbeddingVector {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

/// Keyed CLS vectors sharing one width. Iteration follows the rendered key.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    entries: BTreeMap<EmbeddingKey, EmbeddingVector>,
}

impl Default for EmbeddingStore {
    fn default() -> Self {
        Self::new(EMBEDDING_DIM)
    }
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore { dim, entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, key: EmbeddingKey, vector: EmbeddingVector) -> Result<(), EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::DimMismatch { expected: self.dim, found: vector.len() });
        }
        if self.entries.contains_key(&key) {
            return Err(EmbeddingError::DuplicateKey(key.to_string()));
        }
        self.entries.insert(key, vector);
        Ok(())
    }

    pub fn get(&self, key: &EmbeddingKey) -> Option<&EmbeddingVector> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &EmbeddingKey) -> bool {
        self.entries.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EmbeddingKey, &EmbeddingVector)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &EmbeddingKey> {
        self.entries.keys()
    }

    /// Entries produced by one of the four pairings.
    pub fn pairing(&self, pairing: Pairing) -> impl Iterator<Item = (&EmbeddingKey, &EmbeddingVector)> {
        self.entries.iter().filter(move |(k, _)| k.pairing() == pairing)
    }

    /// Merges another store of the same width; keys must not overlap.
    pub fn extend(&mut self, other: EmbeddingStore) -> Result<(), EmbeddingError> {
        if other.dim != self.dim {
            return Err(EmbeddingError::DimMismatch { expected: self.dim, found: other.dim });
        }
        for (k, v) in other.entries {
            self.insert(k, v)?;
        }
        Ok(())
    }

    /// Same keys and bit-identical vectors.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((ka, va), (kb, vb))| ka == kb && va.bitwise_eq(vb))
    }

    pub fn to_clsv_bytes(&self) -> Result<Vec<u8>, EmbeddingError> {
        let rendered: Vec<(String, &EmbeddingVector)> =
            self.entries.iter().map(|(k, v)| (k.to_string(), v)).collect();
        clsv::encode(self.dim, rendered.iter().map(|(k, v)| (k.as_str(), v.as_slice())))
    }

    pub fn from_clsv_bytes(bytes: &[u8], expected_dim: usize) -> Result<Self, EmbeddingError> {
        let contents = clsv::decode(bytes, Some(expected_dim))?;
        let mut store = EmbeddingStore::new(contents.dim);
        for (key, values) in contents.records {
            let key: EmbeddingKey = key.parse()?;
            store.insert(key, EmbeddingVector(values))?;
        }
        Ok(store)
    }
}

/// Reads a CLSV file whose keys follow the embedding key scheme.
pub fn read_clsv(path: &Path, expected_dim: usize) -> Result<EmbeddingStore, EmbeddingError> {
    let bytes = std::fs::read(path).map_err(|source| EmbeddingError::Io { path: path.into(), source })?;
    EmbeddingStore::from_clsv_bytes(&bytes, expected_dim)
}

pub fn write_clsv(store: &EmbeddingStore, path: &Path) -> Result<(), EmbeddingError> {
    let bytes = store.to_clsv_bytes()?;
    std::fs::write(path, bytes).map_err(|source| EmbeddingError::Io { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::Context;
    use proptest::prelude::*;

    pub(crate) fn arb_store(max_dim: usize) -> impl Strategy<Value = EmbeddingStore> {
        (1..=max_dim).prop_flat_map(|dim| {
            prop::collection::btree_map(
                ("[a-z0-9]{1,6}", prop::option::of(0usize..5), any::<bool>()),
                prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), dim),
                0..12,
            )
            .prop_map(move |entries| {
                let mut store = EmbeddingStore::new(dim);
                for ((owner, idx, hi), values) in entries {
                    let ctx = if hi { Context::Hi } else { Context::En };
                    let key = match idx {
                        Some(i) => EmbeddingKey::human(owner, i, ctx),
                        None => EmbeddingKey::synthetic(owner, ctx),
                    };
                    let _ = store.insert(key, EmbeddingVector::new(values).unwrap());
                }
                store
            })
        })
    }

    #[test]
    fn rejects_wrong_width_and_duplicates() {
        let mut store = EmbeddingStore::new(3);
        let key = EmbeddingKey::synthetic("r", Context::En);
        assert!(store.insert(key.clone(), EmbeddingVector::zeros(2)).is_err());
        store.insert(key.clone(), EmbeddingVector::zeros(3)).unwrap();
        assert!(matches!(store.insert(key, EmbeddingVector::zeros(3)), Err(EmbeddingError::DuplicateKey(_))));
        assert!(EmbeddingVector::new(vec![1.0, f32::INFINITY]).is_err());
    }

    #[test]
    fn file_with_foreign_dim_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.clsv");
        let mut store = EmbeddingStore::new(512);
        store.insert(EmbeddingKey::synthetic("r", Context::En), EmbeddingVector::zeros(512)).unwrap();
        write_clsv(&store, &path).unwrap();
        assert!(matches!(
            read_clsv(&path, EMBEDDING_DIM),
            Err(EmbeddingError::DimMismatch { expected: 768, found: 512 })
        ));
        assert!(read_clsv(&path, 512).unwrap().bitwise_eq(&store));
    }

    #[test]
    fn empty_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.clsv");
        write_clsv(&EmbeddingStore::default(), &path).unwrap();
        let back = read_clsv(&path, EMBEDDING_DIM).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), 768);
    }

    #[test]
    fn non_scheme_key_is_rejected() {
        let bytes = clsv::encode(1, [("record-7", &[0.5f32][..])]).unwrap();
        assert!(matches!(EmbeddingStore::from_clsv_bytes(&bytes, 1), Err(EmbeddingError::InvalidKey { .. })));
    }

    proptest! {
        #[test]
        fn clsv_round_trip_is_bitwise(store in arb_store(16)) {
            let bytes = store.to_clsv_bytes().unwrap();
            let back = EmbeddingStore::from_clsv_bytes(&bytes, store.dim()).unwrap();
            prop_assert!(back.bitwise_eq(&store));
            prop_assert_eq!(back.to_clsv_bytes().unwrap(), bytes);
        }
    }
}

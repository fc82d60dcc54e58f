//! CLSV: framed little-endian container for keyed fixed-width f32 vectors.
//!
//! ```text
//! magic "CLSV" | version u32 = 1 | dim u32 | count u64
//! count x ( key_len u16 | key utf-8 | dim x f32 )
//! ```
//!
//! Writers emit records sorted by key bytes, so equal contents give equal
//! files. The decoder accepts any order but rejects duplicates.

use super::EmbeddingError;

pub const MAGIC: [u8; 4] = *b"CLSV";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

/// Decoded contents of a CLSV file, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClsvContents {
    pub dim: usize,
    pub records: Vec<(String, Vec<f32>)>,
}

/// Size in bytes of a file holding `records` with the given key lengths.
pub fn encoded_len(dim: usize, key_lens: impl IntoIterator<Item = usize>) -> usize {
    HEADER_LEN + key_lens.into_iter().map(|k| 2 + k + 4 * dim).sum::<usize>()
}

/// Encodes records in sorted key order. Every vector must have length `dim`.
pub fn encode<'a, I>(dim: usize, records: I) -> Result<Vec<u8>, EmbeddingError>
where
    I: IntoIterator<Item = (&'a str, &'a [f32])>,
{
    let mut records: Vec<_> = records.into_iter().collect();
    records.sort_by(|a, b| a.0.cmp(b.0));
    let dim_u32 = u32::try_from(dim)
        .map_err(|_| EmbeddingError::DimMismatch { expected: u32::MAX as usize, found: dim })?;
    let mut out = Vec::with_capacity(encoded_len(dim, records.iter().map(|r| r.0.len())));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dim_u32.to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for window in records.windows(2) {
        if window[0].0 == window[1].0 {
            return Err(EmbeddingError::DuplicateKey(window[0].0.to_string()));
        }
    }
    for (key, values) in records {
        let key_len = u16::try_from(key.len()).map_err(|_| EmbeddingError::KeyTooLong(key.len()))?;
        if values.len() != dim {
            return Err(EmbeddingError::DimMismatch { expected: dim, found: values.len() });
        }
        out.extend_from_slice(&key_len.to_le_bytes());
        out.extend_from_slice(key.as_bytes());
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbeddingError> {
        let remaining = self.bytes.len() - self.pos;
        if remaining < n {
            return Err(EmbeddingError::TruncatedFile { offset: self.pos, needed: n - remaining });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], EmbeddingError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Decodes a CLSV byte buffer. With `expected_dim`, a different header
/// dimension is rejected before any record is read.
pub fn decode(bytes: &[u8], expected_dim: Option<usize>) -> Result<ClsvContents, EmbeddingError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = cur.array()?;
    if magic != MAGIC {
        return Err(EmbeddingError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(cur.array()?);
    if version != VERSION {
        return Err(EmbeddingError::UnsupportedVersion(version));
    }
    let dim = u32::from_le_bytes(cur.array()?) as usize;
    if let Some(expected) = expected_dim {
        if dim != expected {
            return Err(EmbeddingError::DimMismatch { expected, found: dim });
        }
    }
    let count = u64::from_le_bytes(cur.array()?);
    // Each record needs at least its length prefix and values.
    let min_record = 2u64 + 4 * dim as u64;
    if count.saturating_mul(min_record) > cur.remaining() as u64 {
        return Err(EmbeddingError::TruncatedFile {
            offset: cur.pos,
            needed: count
                .saturating_mul(min_record)
                .saturating_sub(cur.remaining() as u64)
                .min(usize::MAX as u64) as usize,
        });
    }

    let mut records = Vec::with_capacity(count as usize);
    let mut seen = std::collections::HashSet::with_capacity(count as usize);
    for _ in 0..count {
        let key_len = u16::from_le_bytes(cur.array()?) as usize;
        let key_bytes = cur.take(key_len)?;
        let key = std::str::from_utf8(key_bytes)
            .map_err(|_| EmbeddingError::InvalidKey {
                key: String::from_utf8_lossy(key_bytes).into_owned(),
                reason: "not valid UTF-8".into(),
            })?
            .to_string();
        let raw = cur.take(4 * dim)?;
        let mut values = Vec::with_capacity(dim);
        for (index, chunk) in raw.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().expect("chunk of 4"));
            if !v.is_finite() {
                return Err(EmbeddingError::NonFiniteValue { key, index });
            }
            values.push(v);
        }
        if !seen.insert(key.clone()) {
            return Err(EmbeddingError::DuplicateKey(key));
        }
        records.push((key, values));
    }
    if cur.remaining() > 0 {
        return Err(EmbeddingError::TrailingBytes(cur.remaining()));
    }
    Ok(ClsvContents { dim, records })
}

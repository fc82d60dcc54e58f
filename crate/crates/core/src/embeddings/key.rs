use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EmbeddingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Syn,
    Hum,
}

/// Which side of the English-Hindi pair was sentence A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    En,
    Hi,
}

impl Context {
    pub fn as_str(self) -> &'static str {
        match self {
            Context::En => "en",
            Context::Hi => "hi",
        }
    }
}

/// Identifies one CLS vector. Ordering follows the rendered string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmbeddingKey {
    pub source: Source,
    /// `record_id` for synthetic vectors, `pair_id` for human ones.
    pub owner_id: String,
    pub context: Context,
    pub human_index: Option<usize>,
}

impl EmbeddingKey {
    pub fn synthetic(record_id: impl Into<String>, context: Context) -> Self {
        EmbeddingKey { source: Source::Syn, owner_id: record_id.into(), context, human_index: None }
    }

    pub fn human(pair_id: impl Into<String>, index: usize, context: Context) -> Self {
        EmbeddingKey { source: Source::Hum, owner_id: pair_id.into(), context, human_index: Some(index) }
    }

    pub fn pairing(&self) -> Pairing {
        Pairing { source: self.source, context: self.context }
    }
}

impl fmt::Display for EmbeddingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.source, self.human_index) {
            (Source::Hum, Some(i)) => {
                write!(f, "hum:{}:{}:{}", self.owner_id, i, self.context.as_str())
            }
            (Source::Hum, None) => write!(f, "hum:{}:?:{}", self.owner_id, self.context.as_str()),
            (Source::Syn, _) => write!(f, "syn:{}:{}", self.owner_id, self.context.as_str()),
        }
    }
}

impl Ord for EmbeddingKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl PartialOrd for EmbeddingKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for EmbeddingKey {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid =
            |reason: &str| EmbeddingError::InvalidKey { key: s.to_string(), reason: reason.to_string() };
        let (prefix, rest) = s.split_once(':').ok_or_else(|| invalid("missing source prefix"))?;
        let (body, ctx) = rest.rsplit_once(':').ok_or_else(|| invalid("missing context"))?;
        let context = match ctx {
            "en" => Context::En,
            "hi" => Context::Hi,
            _ => return Err(invalid("context must be `en` or `hi`")),
        };
        let key = match prefix {
            "syn" => EmbeddingKey::synthetic(body, context),
            "hum" => {
                let (owner, idx) = body.rsplit_once(':').ok_or_else(|| invalid("missing human index"))?;
                let index: usize = idx.parse().map_err(|_| invalid("human index is not an integer"))?;
                EmbeddingKey::human(owner, index, context)
            }
            _ => return Err(invalid("source must be `syn` or `hum`")),
        };
        if key.owner_id.is_empty() {
            return Err(invalid("empty owner id"));
        }
        // Reject spellings such as a zero-padded index that would not round-trip.
        if key.to_string() != s {
            return Err(invalid("not in canonical form"));
        }
        Ok(key)
    }
}

/// One of the four (source, context) combinations, each backed by its own file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pairing {
    pub source: Source,
    pub context: Context,
}

impl Pairing {
    pub const SYN_EN: Pairing = Pairing { source: Source::Syn, context: Context::En };
    pub const SYN_HI: Pairing = Pairing { source: Source::Syn, context: Context::Hi };
    pub const HUM_EN: Pairing = Pairing { source: Source::Hum, context: Context::En };
    pub const HUM_HI: Pairing = Pairing { source: Source::Hum, context: Context::Hi };
    pub const ALL: [Pairing; 4] = [Self::SYN_EN, Self::SYN_HI, Self::HUM_EN, Self::HUM_HI];

    /// `syn-en`, `hum-hi`, ...
    pub fn name(self) -> String {
        let source = match self.source {
            Source::Syn => "syn",
            Source::Hum => "hum",
        };
        format!("{source}-{}", self.context.as_str())
    }

    pub fn file_name(self) -> String {
        format!("{}.clsv", self.name())
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::labels::{MAX_RATING, MIN_RATING};
use super::{Generator, ProvidedLabels, SentencePairRecord, SyntheticRecord};

/// Canonical column order; the last two are optional.
pub const CSV_COLUMNS: [&str; 11] = [
    "pair_id",
    "english",
    "hindi",
    "human_hinglish",
    "record_id",
    "generator",
    "synthetic_hinglish",
    "rating1",
    "rating2",
    "average_rating",
    "disagreement",
];

const REQUIRED_COLUMNS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// Guesses the format from the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

impl FromStr for DataFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "json" => Ok(DataFormat::Json),
            other => Err(format!("unknown data format {other:?}")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("input does not match the HinGE schema: {0}")]
    Schema(String),
}

/// A row that could not be turned into a record. `line` is the 1-based
/// physical line for CSV and the 1-based array position for JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedRow {
    pub line: u64,
    pub reason: String,
}

impl fmt::Display for MalformedRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// A later row repeated a `pair_id` with different pair columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairConflict {
    pub line: u64,
    pub pair_id: String,
    pub field: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedDataset {
    pub pairs: Vec<SentencePairRecord>,
    pub synthetic: Vec<SyntheticRecord>,
    pub malformed: Vec<MalformedRow>,
    pub conflicts: Vec<PairConflict>,
}

impl ParsedDataset {
    pub fn pair(&self, pair_id: &str) -> Option<&SentencePairRecord> {
        self.pairs.iter().find(|p| p.pair_id == pair_id)
    }

    /// Index from `pair_id` to position in `pairs`.
    pub fn pair_index(&self) -> HashMap<&str, usize> {
        self.pairs.iter().enumerate().map(|(i, p)| (p.pair_id.as_str(), i)).collect()
    }
}

/// Reads a HinGE file. Row-level problems are collected in
/// [`ParsedDataset::malformed`]; only an unreadable file or a wrong header
/// aborts.
pub fn parse_hinge(path: &Path, format: DataFormat) -> Result<ParsedDataset, DatasetError> {
    let bytes = std::fs::read(path)
        .map_err(|source| DatasetError::UnreadableFile { path: path.to_path_buf(), source })?;
    let text = String::from_utf8(bytes).map_err(|e| {
        DatasetError::Schema(format!("file is not valid UTF-8 (byte {})", e.utf8_error().valid_up_to()))
    })?;
    parse_hinge_str(&text, format)
}

pub fn parse_hinge_str(text: &str, format: DataFormat) -> Result<ParsedDataset, DatasetError> {
    let mut builder = Builder::default();
    match format {
        DataFormat::Csv => parse_csv(text, &mut builder)?,
        DataFormat::Json => parse_json(text, &mut builder)?,
    }
    Ok(builder.finish())
}

/// Column values of one input row, before validation.
#[derive(Default)]
struct RawRow {
    line: u64,
    fields: [Option<String>; 11],
    human: Option<Result<Vec<String>, String>>,
}

impl RawRow {
    fn get(&self, column: usize) -> &str {
        self.fields[column].as_deref().unwrap_or("")
    }
}

fn parse_csv(text: &str, builder: &mut Builder) -> Result<(), DatasetError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(text.as_bytes());
    let headers =
        reader.headers().map_err(|e| DatasetError::Schema(format!("unreadable header: {e}")))?.clone();
    let mut positions = [None; 11];
    for (idx, name) in headers.iter().enumerate() {
        let name = name.trim().trim_start_matches('\u{feff}');
        if let Some(col) = CSV_COLUMNS.iter().position(|c| *c == name) {
            positions[col] = Some(idx);
        }
    }
    let missing: Vec<_> = CSV_COLUMNS[..REQUIRED_COLUMNS]
        .iter()
        .zip(&positions)
        .filter(|(_, p)| p.is_none())
        .map(|(c, _)| *c)
        .collect();
    if !missing.is_empty() {
        return Err(DatasetError::Schema(format!("missing columns: {}", missing.join(", "))));
    }

    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(line, |p| p.line());
                let mut row = RawRow { line, ..RawRow::default() };
                for (col, pos) in positions.iter().enumerate() {
                    row.fields[col] = pos.and_then(|p| record.get(p)).map(str::to_string);
                }
                let human = row.get(3).to_string();
                row.human = Some(
                    serde_json::from_str::<Vec<String>>(&human)
                        .map_err(|e| format!("human_hinglish is not a JSON string array: {e}")),
                );
                builder.ingest(row);
            }
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line());
                builder.malformed(line, format!("unparseable CSV row: {e}"));
                if !matches!(e.kind(), csv::ErrorKind::Utf8 { .. } | csv::ErrorKind::UnequalLengths { .. }) {
                    break;
                }
            }
        }
    }
    Ok(())
}

fn parse_json(text: &str, builder: &mut Builder) -> Result<(), DatasetError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| DatasetError::Schema(format!("invalid JSON: {e}")))?;
    let Value::Array(items) = value else {
        return Err(DatasetError::Schema("top-level value must be an array".into()));
    };
    for (idx, item) in items.into_iter().enumerate() {
        let line = idx as u64 + 1;
        let Value::Object(mut obj) = item else {
            builder.malformed(line, "array element is not an object".into());
            continue;
        };
        let mut row = RawRow { line, ..RawRow::default() };
        let mut bad_field = None;
        for (col, name) in CSV_COLUMNS.iter().enumerate() {
            if col == 3 {
                continue;
            }
            match obj.remove(*name) {
                None | Some(Value::Null) => {}
                Some(Value::String(s)) => row.fields[col] = Some(s),
                Some(Value::Number(n)) => row.fields[col] = Some(n.to_string()),
                Some(_) => bad_field = Some(*name),
            }
        }
        row.human = Some(match obj.remove("human_hinglish") {
            None | Some(Value::Null) => Err("missing human_hinglish".to_string()),
            Some(Value::String(s)) => serde_json::from_str::<Vec<String>>(&s)
                .map_err(|e| format!("human_hinglish is not a JSON string array: {e}")),
            Some(v @ Value::Array(_)) => serde_json::from_value::<Vec<String>>(v)
                .map_err(|e| format!("human_hinglish must contain strings: {e}")),
            Some(_) => Err("human_hinglish must be an array".to_string()),
        });
        if let Some(name) = bad_field {
            builder.malformed(line, format!("field {name} has an unsupported JSON type"));
            continue;
        }
        builder.ingest(row);
    }
    Ok(())
}

fn parse_rating(raw: &str, name: &str) -> Result<u8, String> {
    let raw = raw.trim();
    let value: i64 = match raw.parse() {
        Ok(v) => v,
        // JSON numbers such as 7.0
        Err(_) => match raw.parse::<f64>() {
            Ok(f) if f.fract() == 0.0 && f.abs() < 1e6 => f as i64,
            _ => return Err(format!("{name} is not an integer: {raw:?}")),
        },
    };
    if !(i64::from(MIN_RATING)..=i64::from(MAX_RATING)).contains(&value) {
        return Err(format!("{name} = {value} outside [{MIN_RATING}, {MAX_RATING}]"));
    }
    Ok(value as u8)
}

fn parse_optional_label(raw: &str, name: &str, max: u8) -> Result<Option<u8>, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let value: i64 = match raw.parse() {
        Ok(v) => v,
        Err(_) => match raw.parse::<f64>() {
            Ok(f) if f.fract() == 0.0 && f.abs() < 1e6 => f as i64,
            _ => return Err(format!("{name} is not an integer: {raw:?}")),
        },
    };
    if !(0..=i64::from(max)).contains(&value) {
        return Err(format!("{name} = {value} outside [0, {max}]"));
    }
    Ok(Some(value as u8))
}

#[derive(Default)]
struct Builder {
    pairs: Vec<SentencePairRecord>,
    pair_lookup: HashMap<String, usize>,
    synthetic: Vec<SyntheticRecord>,
    record_ids: HashSet<String>,
    malformed: Vec<MalformedRow>,
    conflicts: Vec<PairConflict>,
}

impl Builder {
    fn malformed(&mut self, line: u64, reason: String) {
        self.malformed.push(MalformedRow { line, reason });
    }

    fn ingest(&mut self, row: RawRow) {
        let line = row.line;
        if let Err(reason) = self.try_ingest(row) {
            self.malformed(line, reason);
        }
    }

    fn try_ingest(&mut self, row: RawRow) -> Result<(), String> {
        let pair_id = row.get(0).trim().to_string();
        if pair_id.is_empty() {
            return Err("empty pair_id".into());
        }
        let human = match row.human {
            Some(Ok(ref h)) => h.iter().map(|s| s.trim_end().to_string()).collect::<Vec<_>>(),
            Some(Err(ref e)) => return Err(e.clone()),
            None => return Err("missing human_hinglish".into()),
        };
        let pair = SentencePairRecord {
            pair_id: pair_id.clone(),
            english_text: row.get(1).trim_end().to_string(),
            hindi_text: row.get(2).trim_end().to_string(),
            human_hinglish: human,
        };

        let synthetic_cols = [4, 5, 6, 7, 8];
        let pair_only = synthetic_cols.iter().all(|&c| row.get(c).trim().is_empty());
        let synthetic = if pair_only {
            None
        } else {
            let record_id = row.get(4).trim().to_string();
            if record_id.is_empty() {
                return Err("empty record_id".into());
            }
            if self.record_ids.contains(&record_id) {
                return Err(format!("duplicate record_id {record_id:?}"));
            }
            let generator: Generator = row.get(5).parse()?;
            let hinglish_text = row.get(6).trim_end().to_string();
            let rating1 = parse_rating(row.get(7), "rating1")?;
            let rating2 = parse_rating(row.get(8), "rating2")?;
            let average_rating = parse_optional_label(row.get(9), "average_rating", MAX_RATING)?;
            let disagreement = parse_optional_label(row.get(10), "disagreement", MAX_RATING - MIN_RATING)?;
            let provided = (average_rating.is_some() || disagreement.is_some())
                .then_some(ProvidedLabels { average_rating, disagreement });
            Some(SyntheticRecord {
                record_id,
                pair_id: pair_id.clone(),
                generator,
                hinglish_text,
                rating1,
                rating2,
                provided,
            })
        };

        match self.pair_lookup.get(&pair_id) {
            Some(&idx) => {
                let existing = &self.pairs[idx];
                let mut conflict = |field: &str| {
                    self.conflicts.push(PairConflict {
                        line: row.line,
                        pair_id: pair_id.clone(),
                        field: field.into(),
                    })
                };
                if existing.english_text != pair.english_text {
                    conflict("english");
                }
                if existing.hindi_text != pair.hindi_text {
                    conflict("hindi");
                }
                if existing.human_hinglish != pair.human_hinglish {
                    conflict("human_hinglish");
                }
            }
            None => {
                self.pair_lookup.insert(pair_id, self.pairs.len());
                self.pairs.push(pair);
            }
        }
        if let Some(record) = synthetic {
            self.record_ids.insert(record.record_id.clone());
            self.synthetic.push(record);
        }
        Ok(())
    }

    fn finish(self) -> ParsedDataset {
        ParsedDataset {
            pairs: self.pairs,
            synthetic: self.synthetic,
            malformed: self.malformed,
            conflicts: self.conflicts,
        }
    }
}

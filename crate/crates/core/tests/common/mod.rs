//! Synthetic HinGE-format fixtures.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ENGLISH: &[&str] = &[
    "the", "reward", "of", "goodness", "river", "city", "book", "morning", "train", "market", "friend",
    "letter", "garden", "music", "school", "rain", "festival", "road", "lamp", "story",
];
const HINDI: &[&str] =
    &["नदी", "शहर", "किताब", "सुबह", "रेल", "बाज़ार", "दोस्त", "पत्र", "बगीचा", "संगीत", "स्कूल", "बारिश"];
const HINGLISH: &[&str] =
    &["ka", "ki", "hai", "nahi", "bahut", "acha", "kal", "aaj", "mein", "aur", "badla", "kya", "ho", "sakta"];

/// Shape of a generated dataset.
#[derive(Debug, Clone, Copy)]
pub struct FixtureShape {
    pub pairs: usize,
    /// Pairs below this index get `low_refs` references, the rest `low_refs + 1`.
    pub refs_split: usize,
    pub low_refs: usize,
    /// Pairs below this index get two synthetic records, the rest one.
    pub double_synthetic: usize,
}

impl FixtureShape {
    /// 1976 pairs, 6694 human references, 2766 synthetic records.
    pub const HINGE: FixtureShape =
        FixtureShape { pairs: 1976, refs_split: 1210, low_refs: 3, double_synthetic: 790 };

    pub fn small(pairs: usize) -> Self {
        FixtureShape { pairs, refs_split: pairs / 2, low_refs: 2, double_synthetic: pairs / 3 }
    }

    pub fn references(&self, pair: usize) -> usize {
        if pair < self.refs_split {
            self.low_refs
        } else {
            self.low_refs + 1
        }
    }

    pub fn synthetic(&self, pair: usize) -> usize {
        if pair < self.double_synthetic {
            2
        } else {
            1
        }
    }

    pub fn total_references(&self) -> usize {
        (0..self.pairs).map(|p| self.references(p)).sum()
    }

    pub fn total_synthetic(&self) -> usize {
        (0..self.pairs).map(|p| self.synthetic(p)).sum()
    }
}

fn sentence(rng: &mut ChaCha8Rng, vocab: &[&str]) -> String {
    let len = rng.random_range(4..10);
    (0..len).map(|_| vocab[rng.random_range(0..vocab.len())]).collect::<Vec<_>>().join(" ")
}

/// CSV text in the canonical column order, including the provided label columns.
pub fn fixture_csv(shape: FixtureShape, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record([
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
    ])
    .unwrap();
    let mut record = 0usize;
    for pair in 0..shape.pairs {
        let english = sentence(&mut rng, ENGLISH);
        let hindi = sentence(&mut rng, HINDI);
        let refs: Vec<String> = (0..shape.references(pair)).map(|_| sentence(&mut rng, HINGLISH)).collect();
        let refs = serde_json::to_string(&refs).unwrap();
        for k in 0..shape.synthetic(pair) {
            let r1: u8 = rng.random_range(1..=10);
            let r2: u8 = rng.random_range(1..=10);
            let generator = if k % 2 == 0 { "WAC" } else { "PAC" };
            out.write_record([
                format!("p{pair:05}"),
                english.clone(),
                hindi.clone(),
                refs.clone(),
                format!("s{record:05}"),
                generator.to_string(),
                format!("{} {}", sentence(&mut rng, HINGLISH), sentence(&mut rng, ENGLISH)),
                r1.to_string(),
                r2.to_string(),
                ((r1 + r2).div_ceil(2)).to_string(),
                r1.abs_diff(r2).to_string(),
            ])
            .unwrap();
            record += 1;
        }
    }
    String::from_utf8(out.into_inner().unwrap()).unwrap()
}

pub fn write_fixture(dir: &Path, shape: FixtureShape, seed: u64) -> PathBuf {
    let path = dir.join("hinge.csv");
    std::fs::write(&path, fixture_csv(shape, seed)).unwrap();
    path
}

/// Real HinGE data, if `HINGE_PATH` points at it.
pub fn real_hinge() -> Option<PathBuf> {
    let path = PathBuf::from(std::env::var_os("HINGE_PATH")?);
    path.exists().then_some(path)
}

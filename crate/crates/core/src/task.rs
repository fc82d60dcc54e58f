use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The two prediction targets derived from a pair of annotator ratings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Rounded mean of the two ratings, labels 1..=10.
    Rating,
    /// Absolute difference of the two ratings, labels 0..=9.
    Disagreement,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Rating, Task::Disagreement];

    /// Number of output classes; both tasks use ten.
    pub const NUM_CLASSES: usize = 10;

    /// Smallest label on the task's natural scale.
    pub fn label_offset(self) -> u8 {
        match self {
            Task::Rating => 1,
            Task::Disagreement => 0,
        }
    }

    pub fn default_epochs(self) -> usize {
        match self {
            Task::Rating => 3,
            Task::Disagreement => 10,
        }
    }

    pub fn is_valid_label(self, label: u8) -> bool {
        let lo = self.label_offset();
        label >= lo && usize::from(label - lo) < Self::NUM_CLASSES
    }

    /// Maps a natural-scale label to a 0-based class index.
    pub fn class_index(self, label: u8) -> Option<usize> {
        self.is_valid_label(label).then(|| usize::from(label - self.label_offset()))
    }

    /// Maps a 0-based class index back to the natural scale.
    pub fn label_of_class(self, class: usize) -> u8 {
        debug_assert!(class < Self::NUM_CLASSES);
        self.label_offset() + class as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Rating => "rating",
            Task::Disagreement => "disagreement",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown task {0:?}, expected `rating` or `disagreement`")]
pub struct ParseTaskError(String);

impl FromStr for Task {
    type Err = ParseTaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rating" => Ok(Task::Rating),
            "disagreement" => Ok(Task::Disagreement),
            _ => Err(ParseTaskError(s.to_string())),
        }
    }
}

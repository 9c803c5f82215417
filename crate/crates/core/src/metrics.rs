//! Text entry rate and error measures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::CommitRecord;
use crate::layout::Action;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("session has {chars} transcribed characters but zero duration")]
    ZeroDuration { chars: usize },
}

/// Outcome of one typing session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub transcribed: String,
    pub commit_log: Vec<CommitRecord>,
    /// Time from the first to the last gaze sample.
    pub duration_ms: f64,
    /// Commits that typed a character or space, including ones later cleared.
    pub total_typed: usize,
    pub clear_count: usize,
}

impl SessionResult {
    pub fn empty() -> Self {
        Self {
            transcribed: String::new(),
            commit_log: Vec::new(),
            duration_ms: 0.0,
            total_typed: 0,
            clear_count: 0,
        }
    }

    pub fn from_commits(transcribed: String, commit_log: Vec<CommitRecord>, duration_ms: f64) -> Self {
        let clear_count = commit_log.iter().filter(|c| c.item.action == Action::ClearLast).count();
        Self {
            transcribed,
            total_typed: commit_log.len() - clear_count,
            commit_log,
            duration_ms,
            clear_count,
        }
    }

    pub fn metrics(&self, target: &str) -> Result<Metrics, MetricsError> {
        compute_metrics(self, target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub wpm: f64,
    pub uncorrected_error_pct: f64,
    /// Edit distance between transcript and target.
    pub uncorrected_chars: usize,
    pub corrections: usize,
    pub kspc: f64,
}

/// Words per minute, with a word being five characters.
pub fn words_per_minute(chars: usize, duration_ms: f64) -> f64 {
    if chars == 0 {
        return 0.0;
    }
    (chars as f64 / 5.0) * (60_000.0 / duration_ms)
}

pub fn compute_metrics(result: &SessionResult, target: &str) -> Result<Metrics, MetricsError> {
    let chars = result.transcribed.chars().count();
    if chars > 0 && result.duration_ms <= 0.0 {
        return Err(MetricsError::ZeroDuration { chars });
    }
    let uncorrected = edit_distance(&result.transcribed, target);
    // A transcript shorter than its target can be further from it than the
    // number of characters typed.
    let pct = (100.0 * uncorrected as f64 / result.total_typed.max(1) as f64).min(100.0);
    Ok(Metrics {
        wpm: words_per_minute(chars, result.duration_ms),
        uncorrected_error_pct: pct,
        uncorrected_chars: uncorrected,
        corrections: result.clear_count,
        kspc: result.commit_log.len() as f64 / target.chars().count().max(1) as f64,
    })
}

/// Levenshtein distance with unit costs, over `char`s.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

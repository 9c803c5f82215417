//! Parameter sweeps over slice count, character ring width and strategy.
//!
//! A sweep spec is a TOML document:
//!
//! ```toml
//! slice_counts = [4, 5, 6, 7]
//! char_widths_px = [100]
//! strategies = ["border_crossing", "dwell:400"]
//! seeds = [1, 2, 3]
//! phrases = ["the quick brown fox"]   # optional, defaults to DEFAULT_PHRASES
//!
//! [params]    # optional SimParams overrides; `seed` is ignored
//! jitter_sigma_px = 10.0
//!
//! [config]    # optional PieConfig base; slices and width come from the cell
//! safe_width_px = 20.0
//! ```
//!
//! Every cell simulates all phrase × seed combinations and reports means.
//! Cells run in parallel but rows always come out in spec order.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Strategy;
use crate::geometry::{PieConfig, PieMenu};
use crate::layout::{Action, Layout};
use crate::simulator::{simulate_user, SimParams};

pub const CSV_HEADER: &str = "slices,width_px,strategy,mean_wpm,mean_error_pct,n";

/// Lowercase stimulus phrases used when a spec does not list its own.
pub const DEFAULT_PHRASES: &[&str] = &[
    "the quick brown fox jumps over the lazy dog",
    "pack my box with five dozen liquor jugs",
    "how vexingly quick daft zebras jump",
    "sphinx of black quartz judge my vow",
    "the five boxing wizards jump quickly",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep spec field {0} must not be empty")]
    Empty(&'static str),
    #[error("phrase {phrase:?} contains untypeable character {ch:?}")]
    Phrase { phrase: String, ch: char },
    #[error("cannot parse sweep spec: {0}")]
    Parse(String),
    #[error("unknown preset {0:?} (expected slices, width or selection)")]
    UnknownPreset(String),
}

fn default_phrases() -> Vec<String> {
    DEFAULT_PHRASES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub slice_counts: Vec<usize>,
    pub char_widths_px: Vec<f64>,
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_phrases")]
    pub phrases: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub params: SimParams,
    #[serde(default)]
    pub config: PieConfig<f64>,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        toml::from_str(text).map_err(|e| SweepError::Parse(e.to_string()))
    }

    /// Built-in sweeps: `slices` (4–7 slices at 100 px), `width`
    /// (80–140 px at 6 slices) and `selection` (border crossing against a
    /// 400 ms dwell at 6 slices, 120 px).
    pub fn preset(name: &str) -> Result<Self, SweepError> {
        let base = |slice_counts: Vec<usize>, char_widths_px: Vec<f64>, strategies| SweepSpec {
            slice_counts,
            char_widths_px,
            strategies,
            phrases: default_phrases(),
            seeds: (1..=10).collect(),
            params: SimParams::default(),
            config: PieConfig::default(),
        };
        match name {
            "slices" | "a" | "A" => Ok(base(vec![4, 5, 6, 7], vec![100.0], vec![Strategy::BorderCrossing])),
            "width" | "b" | "B" => Ok(base(
                vec![6],
                vec![80.0, 100.0, 120.0, 140.0],
                vec![Strategy::BorderCrossing],
            )),
            "selection" | "c" | "C" => Ok(base(
                vec![6],
                vec![120.0],
                vec![Strategy::BorderCrossing, Strategy::DWELL_400],
            )),
            other => Err(SweepError::UnknownPreset(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.slice_counts.is_empty() {
            return Err(SweepError::Empty("slice_counts"));
        }
        if self.char_widths_px.is_empty() {
            return Err(SweepError::Empty("char_widths_px"));
        }
        if self.strategies.is_empty() {
            return Err(SweepError::Empty("strategies"));
        }
        if self.phrases.is_empty() {
            return Err(SweepError::Empty("phrases"));
        }
        if self.seeds.is_empty() {
            return Err(SweepError::Empty("seeds"));
        }
        for phrase in &self.phrases {
            if let Some(ch) = phrase.chars().find(|&c| Action::for_char(c).is_none()) {
                return Err(SweepError::Phrase {
                    phrase: phrase.clone(),
                    ch,
                });
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, f64, Strategy)> {
        let mut out = Vec::new();
        for &n in &self.slice_counts {
            for &w in &self.char_widths_px {
                for &s in &self.strategies {
                    out.push((n, w, s));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellStats {
    pub mean_wpm: f64,
    pub mean_error_pct: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub slices: usize,
    pub width_px: f64,
    pub strategy: Strategy,
    /// Error text for cells whose configuration is invalid.
    pub outcome: Result<CellStats, String>,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let mut line = format!("{},{},{},", self.slices, self.width_px, self.strategy);
        match &self.outcome {
            Ok(s) => {
                let _ = write!(line, "{:.4},{:.4},{}", s.mean_wpm, s.mean_error_pct, s.n);
            }
            Err(_) => line.push_str(",,0"),
        }
        line
    }
}

fn run_cell(spec: &SweepSpec, slices: usize, width: f64, strategy: Strategy) -> Result<CellStats, String> {
    let layout = Layout::build(slices).map_err(|e| e.to_string())?;
    let config = spec.config.with_slices(slices).with_char_width(width);
    let pie = PieMenu::new(config, layout).map_err(|e| e.to_string())?;
    let (mut wpm, mut err, mut n) = (0.0, 0.0, 0usize);
    for phrase in &spec.phrases {
        for &seed in &spec.seeds {
            let params = spec.params.clone().with_seed(seed);
            let session = simulate_user(phrase, &pie, strategy, &params).map_err(|e| e.to_string())?;
            let m = session.result.metrics(&session.target).map_err(|e| e.to_string())?;
            wpm += m.wpm;
            err += m.uncorrected_error_pct;
            n += 1;
        }
    }
    Ok(CellStats {
        mean_wpm: wpm / n as f64,
        mean_error_pct: err / n as f64,
        n,
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    spec.params.validate().map_err(|e| SweepError::Parse(e.to_string()))?;
    Ok(spec
        .cells()
        .into_par_iter()
        .map(|(slices, width_px, strategy)| SweepRow {
            slices,
            width_px,
            strategy,
            outcome: run_cell(spec, slices, width_px, strategy),
        })
        .collect())
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

//! Gaze trace files.
//!
//! A trace file is JSON Lines. The first line is a header record:
//!
//! ```text
//! {"format":"quickpie-trace","version":1,"config":{...},"source":{...}}
//! ```
//!
//! followed by one `{"t_ms":..,"x":..,"y":..}` record per sample. Blank
//! lines are ignored. A file without a header is read as a recording with
//! no metadata.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{GazeSample, Strategy};
use crate::geometry::PieConfig;
use crate::scalar::Scalar;
use crate::simulator::SimParams;

pub const FORMAT_NAME: &str = "quickpie-trace";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: timestamp {t_ms} does not increase")]
    NonMonotone { line: usize, t_ms: f64 },
    #[error("line {line}: unsupported trace header: {message}")]
    Header { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceSource {
    Synthetic {
        phrase: String,
        strategy: Strategy,
        params: SimParams,
    },
    Recorded {
        #[serde(default)]
        description: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct TraceMeta<F = f64> {
    pub config: Option<PieConfig<F>>,
    pub source: TraceSource,
}

impl<F> TraceMeta<F> {
    pub fn recorded(description: impl Into<String>) -> Self {
        Self {
            config: None,
            source: TraceSource::Recorded {
                description: description.into(),
            },
        }
    }

    /// Phrase the trace was generated for, if known.
    pub fn phrase(&self) -> Option<&str> {
        match &self.source {
            TraceSource::Synthetic { phrase, .. } => Some(phrase),
            TraceSource::Recorded { .. } => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
struct Header<F> {
    format: String,
    version: u32,
    #[serde(flatten)]
    meta: TraceMeta<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct GazeTrace<F = f64> {
    samples: Vec<GazeSample<F>>,
    meta: TraceMeta<F>,
}

impl<F: Scalar> GazeTrace<F> {
    pub fn new(samples: Vec<GazeSample<F>>, meta: TraceMeta<F>) -> Self {
        Self { samples, meta }
    }

    pub fn samples(&self) -> &[GazeSample<F>] {
        &self.samples
    }

    pub fn meta(&self) -> &TraceMeta<F> {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_ms(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t_ms - a.t_ms,
            _ => 0.0,
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header = Header {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            meta: self.meta.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for s in &self.samples {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, TraceError> {
        let mut meta = None;
        let mut samples: Vec<GazeSample<F>> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(text).map_err(|e| TraceError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            if value.get("format").is_some() {
                if meta.is_some() || !samples.is_empty() {
                    return Err(TraceError::Header {
                        line: line_no,
                        message: "header must be the first record".into(),
                    });
                }
                let header: Header<F> = serde_json::from_value(value).map_err(|e| TraceError::Header {
                    line: line_no,
                    message: e.to_string(),
                })?;
                if header.format != FORMAT_NAME || header.version != FORMAT_VERSION {
                    return Err(TraceError::Header {
                        line: line_no,
                        message: format!("{} v{}", header.format, header.version),
                    });
                }
                meta = Some(header.meta);
                continue;
            }
            let sample: GazeSample<F> = serde_json::from_value(value).map_err(|e| TraceError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            if !(sample.t_ms.is_finite() && sample.x.is_finite() && sample.y.is_finite()) {
                return Err(TraceError::Malformed {
                    line: line_no,
                    message: "non-finite field".into(),
                });
            }
            if samples.last().is_some_and(|p| sample.t_ms <= p.t_ms) {
                return Err(TraceError::NonMonotone {
                    line: line_no,
                    t_ms: sample.t_ms,
                });
            }
            samples.push(sample);
        }
        Ok(Self {
            samples,
            meta: meta.unwrap_or_else(|| TraceMeta::recorded("")),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TraceError> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => TraceError::NotFound(path.display().to_string()),
            _ => TraceError::Io(e),
        })?;
        Self::read_from(BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let file = fs::File::create(path)?;
        self.write_to(io::BufWriter::new(file))
    }
}

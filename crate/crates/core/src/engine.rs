//! Interaction state machine.
//!
//! The engine consumes gaze samples one at a time. Looking at a slice in the
//! pie disk focuses it at once. Looking at a cell of the focused slice's
//! character ring highlights and arms that cell. Entering the selection ring
//! while armed commits the highlighted item and disarms. Only a return to the
//! character ring re-arms, so jitter across the safe ring or the selection
//! border cannot repeat a commit.
//!
//! The dwell strategy keeps the same geometry but commits once the gaze has
//! stayed in one cell for `dwell_ms`; the safe and selection rings are inert.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PieMenu, RegionKind};
use crate::layout::Item;
use crate::metrics::SessionResult;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("sample at t={got} ms does not follow previous sample at t={prev} ms")]
    NonMonotone { prev: f64, got: f64 },
    #[error("sample has non-finite fields")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct GazeSample<F = f64> {
    pub t_ms: f64,
    pub x: F,
    pub y: F,
}

impl<F: Scalar> GazeSample<F> {
    pub fn new(t_ms: f64, x: F, y: F) -> Self {
        Self { t_ms, x, y }
    }
}

/// How a highlighted item gets committed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    #[default]
    BorderCrossing,
    Dwell {
        dwell_ms: f64,
    },
}

impl Strategy {
    pub const DWELL_400: Strategy = Strategy::Dwell { dwell_ms: 400.0 };
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::BorderCrossing => f.write_str("border_crossing"),
            Strategy::Dwell { dwell_ms } => write!(f, "dwell:{dwell_ms}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy {0:?} (expected border_crossing or dwell:<ms>)")]
pub struct ParseStrategyError(String);

impl FromStr for Strategy {
    type Err = ParseStrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseStrategyError(s.to_string());
        match s.trim() {
            "border_crossing" | "border" => Ok(Strategy::BorderCrossing),
            "dwell" => Ok(Strategy::DWELL_400),
            other => {
                let ms = other.strip_prefix("dwell:").ok_or_else(err)?;
                let dwell_ms: f64 = ms.trim().parse().map_err(|_| err())?;
                if !(dwell_ms.is_finite() && dwell_ms >= 0.0) {
                    return Err(err());
                }
                Ok(Strategy::Dwell { dwell_ms })
            }
        }
    }
}

impl TryFrom<String> for Strategy {
    type Error = ParseStrategyError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

/// When the selection ring fires under [`Strategy::BorderCrossing`].
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionTrigger {
    /// Fire on entry while armed; re-arm only in the character ring.
    #[default]
    Armed,
    /// Fire on every entry into the selection ring. Models an interface
    /// without the arming rule; used to show what the safe ring prevents.
    EveryEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub t_ms: f64,
    pub item: Item,
    /// Buffer length after the action was applied.
    pub buffer_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    FocusChanged(Option<usize>),
    /// Highlighted cell or its armed flag changed.
    HighlightChanged(Option<usize>),
    Committed(Item),
    BufferChanged,
    NoChange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineEvent {
    pub kind: EventKind,
    pub t_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub focused: Option<usize>,
    pub highlighted: Option<usize>,
    pub armed: bool,
    pub buffer: String,
    pub commit_log: Vec<CommitRecord>,
    pub strategy: Strategy,
    pub dwell_accum_ms: f64,
    #[doc(hidden)]
    pub trigger: SelectionTrigger,
    dwell_entry_ms: Option<f64>,
    in_selection: bool,
    first_t_ms: Option<f64>,
    last_t_ms: Option<f64>,
}

impl EngineState {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            focused: None,
            highlighted: None,
            armed: false,
            buffer: String::new(),
            commit_log: Vec::new(),
            strategy,
            dwell_accum_ms: 0.0,
            trigger: SelectionTrigger::Armed,
            dwell_entry_ms: None,
            in_selection: false,
            first_t_ms: None,
            last_t_ms: None,
        }
    }

    pub fn last_t_ms(&self) -> Option<f64> {
        self.last_t_ms
    }

    /// Time between the first and last accepted sample.
    pub fn duration_ms(&self) -> f64 {
        match (self.first_t_ms, self.last_t_ms) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Checks the structural invariants: highlight implies focus, armed
    /// implies highlight, and the buffer is the fold of the commit log.
    pub fn is_consistent(&self) -> bool {
        let mut folded = String::new();
        for c in &self.commit_log {
            c.item.action.apply(&mut folded);
        }
        (self.highlighted.is_none() || self.focused.is_some())
            && (!self.armed || self.highlighted.is_some())
            && folded == self.buffer
    }
}

/// One typing session: a pie menu plus the evolving interaction state.
#[derive(Debug, Clone)]
pub struct Engine<F = f64> {
    pie: PieMenu<F>,
    state: EngineState,
}

impl<F: Scalar> Engine<F> {
    pub fn new(pie: PieMenu<F>, strategy: Strategy) -> Self {
        Self {
            pie,
            state: EngineState::new(strategy),
        }
    }

    /// Resumes from a saved state.
    pub fn from_state(pie: PieMenu<F>, state: EngineState) -> Self {
        Self { pie, state }
    }

    #[doc(hidden)]
    pub fn with_trigger(mut self, trigger: SelectionTrigger) -> Self {
        self.state.trigger = trigger;
        self
    }

    pub fn pie(&self) -> &PieMenu<F> {
        &self.pie
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn into_state(self) -> EngineState {
        self.state
    }

    pub fn buffer(&self) -> &str {
        &self.state.buffer
    }

    pub fn reset(&mut self) {
        let trigger = self.state.trigger;
        self.state = EngineState::new(self.state.strategy);
        self.state.trigger = trigger;
    }

    pub fn session_result(&self) -> SessionResult {
        SessionResult::from_commits(
            self.state.buffer.clone(),
            self.state.commit_log.clone(),
            self.state.duration_ms(),
        )
    }

    /// Advances by one sample. Rejected samples leave the state untouched.
    pub fn step(&mut self, sample: GazeSample<F>) -> Result<Vec<EngineEvent>, EngineError> {
        if !(sample.t_ms.is_finite() && sample.x.is_finite() && sample.y.is_finite()) {
            return Err(EngineError::NonFinite);
        }
        if let Some(prev) = self.state.last_t_ms {
            if sample.t_ms <= prev {
                return Err(EngineError::NonMonotone { prev, got: sample.t_ms });
            }
        }
        let t = sample.t_ms;
        self.state.first_t_ms.get_or_insert(t);
        self.state.last_t_ms = Some(t);

        let hit = self.pie.hit_test(self.state.focused, sample.x, sample.y);
        let mut events = Vec::new();
        match self.state.strategy {
            Strategy::BorderCrossing => self.border_crossing(hit.kind, t, &mut events),
            Strategy::Dwell { dwell_ms } => self.dwell(hit.kind, t, dwell_ms, &mut events),
        }
        self.state.in_selection = hit.kind == RegionKind::Selection;
        if events.is_empty() {
            events.push(EngineEvent {
                kind: EventKind::NoChange,
                t_ms: t,
            });
        }
        Ok(events)
    }

    fn focus(&mut self, slice: usize, t: f64, events: &mut Vec<EngineEvent>) {
        let st = &mut self.state;
        st.focused = Some(slice);
        events.push(EngineEvent {
            kind: EventKind::FocusChanged(Some(slice)),
            t_ms: t,
        });
        if st.highlighted.take().is_some() {
            events.push(EngineEvent {
                kind: EventKind::HighlightChanged(None),
                t_ms: t,
            });
        }
        st.armed = false;
        st.dwell_entry_ms = None;
        st.dwell_accum_ms = 0.0;
    }

    fn highlight(&mut self, cell: usize, t: f64, events: &mut Vec<EngineEvent>) {
        let st = &mut self.state;
        if st.highlighted != Some(cell) || !st.armed {
            st.highlighted = Some(cell);
            st.armed = true;
            events.push(EngineEvent {
                kind: EventKind::HighlightChanged(Some(cell)),
                t_ms: t,
            });
        }
    }

    fn commit(&mut self, t: f64, events: &mut Vec<EngineEvent>) {
        let (Some(slice), Some(cell)) = (self.state.focused, self.state.highlighted) else {
            return;
        };
        let Some(item) = self.pie.layout().item(slice, cell).cloned() else {
            return;
        };
        let st = &mut self.state;
        item.action.apply(&mut st.buffer);
        st.commit_log.push(CommitRecord {
            t_ms: t,
            item: item.clone(),
            buffer_len: st.buffer.chars().count(),
        });
        st.armed = false;
        events.push(EngineEvent {
            kind: EventKind::Committed(item),
            t_ms: t,
        });
        events.push(EngineEvent {
            kind: EventKind::BufferChanged,
            t_ms: t,
        });
    }

    fn border_crossing(&mut self, kind: RegionKind, t: f64, events: &mut Vec<EngineEvent>) {
        match kind {
            RegionKind::PieSlice(s) if self.state.focused != Some(s) => self.focus(s, t, events),
            RegionKind::CharCell(i) => self.highlight(i, t, events),
            RegionKind::Selection => {
                let fire = match self.state.trigger {
                    SelectionTrigger::Armed => self.state.armed,
                    SelectionTrigger::EveryEntry => !self.state.in_selection && self.state.highlighted.is_some(),
                };
                if fire {
                    self.commit(t, events);
                }
            }
            RegionKind::PieSlice(_) | RegionKind::Safe | RegionKind::Background => {}
        }
    }

    fn dwell(&mut self, kind: RegionKind, t: f64, dwell_ms: f64, events: &mut Vec<EngineEvent>) {
        match kind {
            RegionKind::PieSlice(s) if self.state.focused != Some(s) => self.focus(s, t, events),
            RegionKind::CharCell(i) => {
                let continuing = self.state.highlighted == Some(i) && self.state.dwell_entry_ms.is_some();
                if !continuing {
                    self.state.dwell_entry_ms = Some(t);
                    self.state.dwell_accum_ms = 0.0;
                    self.highlight(i, t, events);
                }
                let entry = self.state.dwell_entry_ms.unwrap_or(t);
                self.state.dwell_accum_ms = t - entry;
                if self.state.armed && self.state.dwell_accum_ms >= dwell_ms {
                    self.commit(t, events);
                }
            }
            _ => {
                if self.state.dwell_entry_ms.take().is_some() {
                    self.state.dwell_accum_ms = 0.0;
                    if self.state.armed {
                        self.state.armed = false;
                        events.push(EngineEvent {
                            kind: EventKind::HighlightChanged(self.state.highlighted),
                            t_ms: t,
                        });
                    }
                }
            }
        }
    }
}

/// Runs a whole sample sequence through a fresh engine.
pub fn replay<F: Scalar>(
    samples: &[GazeSample<F>],
    pie: &PieMenu<F>,
    strategy: Strategy,
) -> Result<SessionResult, EngineError> {
    let mut engine = Engine::new(pie.clone(), strategy);
    for &s in samples {
        engine.step(s)?;
    }
    Ok(engine.session_result())
}

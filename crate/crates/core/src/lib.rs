//! Dwell-free gaze typing on a single-layer pie menu.
//!
//! A focused slice expands and grows three outer rings: character cells, a
//! neutral safe ring and a selection ring. Moving the gaze from a highlighted
//! character across the safe ring into the selection ring types it.
//!
//! The geometric and simulation code is generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix it to `f64` or `f32`.

pub mod engine;
pub mod geometry;
pub mod layout;
pub mod metrics;
pub mod scalar;
pub mod service;
pub mod simulator;
pub mod sweep;
pub mod trace;

pub use engine::{CommitRecord, Engine, EngineError, EngineEvent, EngineState, EventKind, GazeSample, Strategy};
pub use geometry::{Angle, GeometryError, PieConfig, PieMenu, RegionHit, RegionKind, SliceSpan};
pub use layout::{Action, Item, Layout, LayoutError};
pub use metrics::{compute_metrics, edit_distance, Metrics, MetricsError, SessionResult};
pub use scalar::Scalar;
pub use simulator::{SimParams, SimulatedSession};
pub use trace::{GazeTrace, TraceError};

pub type PieConfig64 = PieConfig<f64>;
pub type PieConfig32 = PieConfig<f32>;
pub type PieMenu64 = PieMenu<f64>;
pub type PieMenu32 = PieMenu<f32>;
pub type Engine64 = Engine<f64>;
pub type Engine32 = Engine<f32>;
pub type GazeSample64 = GazeSample<f64>;
pub type GazeSample32 = GazeSample<f32>;
pub type GazeTrace64 = GazeTrace<f64>;
pub type GazeTrace32 = GazeTrace<f32>;

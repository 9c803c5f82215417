//! Synthetic gaze traces.
//!
//! A simulated user visits a sequence of waypoints. Each visit is a latency
//! pause at the current position, a straight saccade to the waypoint and a
//! fixation on it. Fixations (and latency pauses, which are fixations on the
//! previous target) carry Gaussian jitter; every emitted sample carries
//! additional tracker noise. Gaze is sampled on a fixed clock.
//!
//! Timing draws, per-sample noise and user decisions come from three
//! independent ChaCha streams of the same seed, so two runs that visit the
//! same waypoints draw the same durations even when their sample counts
//! differ.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Engine, EngineError, GazeSample, Strategy};
use crate::geometry::PieMenu;
use crate::layout::{Action, LayoutError};
use crate::metrics::SessionResult;
use crate::scalar::Scalar;
use crate::trace::{GazeTrace, TraceMeta, TraceSource};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("invalid simulation parameter: {0}")]
    Params(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub seed: u64,
    pub sample_rate_hz: f64,
    pub px_per_deg: f64,
    pub jitter_sigma_px: f64,
    pub tracker_sigma_px: f64,
    pub fixation_ms_range: (f64, f64),
    pub latency_ms_range: (f64, f64),
    /// Clamp bounds for saccade durations.
    pub saccade_ms_range: (f64, f64),
    /// Scales fixation durations; 1 is a novice.
    pub expertise: f64,
    /// Probability of noticing a wrong commit and clearing it.
    pub p_notice: f64,
    /// Extra attempts per character before the user moves on.
    pub max_retries: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            seed: 0,
            sample_rate_hz: 60.0,
            px_per_deg: 35.0,
            jitter_sigma_px: 10.0,
            tracker_sigma_px: 5.0,
            fixation_ms_range: (200.0, 600.0),
            latency_ms_range: (100.0, 200.0),
            saccade_ms_range: (30.0, 120.0),
            expertise: 1.0,
            p_notice: 1.0,
            max_retries: 5,
        }
    }
}

impl SimParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// No jitter and no tracker noise.
    pub fn noiseless(mut self) -> Self {
        self.jitter_sigma_px = 0.0;
        self.tracker_sigma_px = 0.0;
        self
    }

    pub fn sample_period_ms(&self) -> f64 {
        1000.0 / self.sample_rate_hz
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Params(m.to_string()));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let range_ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && 0.0 <= a && a <= b;
        if !positive(self.sample_rate_hz) {
            return bad("sample_rate_hz must be positive");
        }
        if !positive(self.px_per_deg) {
            return bad("px_per_deg must be positive");
        }
        if !(self.jitter_sigma_px.is_finite() && self.jitter_sigma_px >= 0.0) {
            return bad("jitter_sigma_px must be non-negative");
        }
        if !(self.tracker_sigma_px.is_finite() && self.tracker_sigma_px >= 0.0) {
            return bad("tracker_sigma_px must be non-negative");
        }
        for (name, r) in [
            ("fixation_ms_range", self.fixation_ms_range),
            ("latency_ms_range", self.latency_ms_range),
            ("saccade_ms_range", self.saccade_ms_range),
        ] {
            if !range_ok(r) {
                return Err(SimError::Params(format!("{name} must satisfy 0 <= min <= max")));
            }
        }
        if !(self.expertise > 0.0 && self.expertise <= 1.0) {
            return bad("expertise must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.p_notice) {
            return bad("p_notice must be in [0, 1]");
        }
        Ok(())
    }

    /// Saccade duration for an amplitude in degrees.
    pub fn saccade_ms(&self, amplitude_deg: f64) -> f64 {
        let (lo, hi) = self.saccade_ms_range;
        (20.0 + 2.0 * amplitude_deg).clamp(lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Purpose {
    FocusSlice { slice: usize },
    Cell { slice: usize, item: usize },
    Select { slice: usize, item: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Waypoint<F = f64> {
    pub x: F,
    pub y: F,
    pub purpose: Purpose,
}

/// Waypoints that type one item given the slice currently in focus.
///
/// The pie waypoint is skipped when the item's slice is already focused.
pub fn plan_key<F: Scalar>(pie: &PieMenu<F>, focused: Option<usize>, slice: usize, item: usize) -> Vec<Waypoint<F>> {
    let cfg = pie.config();
    let mut out = Vec::with_capacity(3);
    if focused != Some(slice) {
        let span = pie.span(slice, focused);
        let (x, y) = crate::geometry::point_at(cfg, span.center().degrees(), F::lit(0.6) * cfg.pie_radius_px);
        out.push(Waypoint {
            x,
            y,
            purpose: Purpose::FocusSlice { slice },
        });
    }
    let theta = pie.cell_theta(slice, item).expect("located item is in range");
    let (x, y) = pie.cell_center(slice, item).expect("located item is in range");
    out.push(Waypoint {
        x,
        y,
        purpose: Purpose::Cell { slice, item },
    });
    let (x, y) = pie.selection_point(theta);
    out.push(Waypoint {
        x,
        y,
        purpose: Purpose::Select { slice, item },
    });
    out
}

/// Open-loop plan for a phrase, starting with nothing focused.
pub fn plan_waypoints<F: Scalar>(phrase: &str, pie: &PieMenu<F>) -> Result<Vec<Waypoint<F>>, SimError> {
    let mut focused = None;
    let mut out = Vec::new();
    for c in phrase.chars() {
        let (slice, item) = pie.layout().locate_char(c)?;
        out.extend(plan_key(pie, focused, slice, item));
        focused = Some(slice);
    }
    Ok(out)
}

/// Emits samples on the fixed clock while moving through waypoints.
struct GazeGenerator<'a, F> {
    params: &'a SimParams,
    timing: ChaCha8Rng,
    noise: ChaCha8Rng,
    period_ms: f64,
    next_sample: u64,
    clock_ms: f64,
    pos: Option<(F, F)>,
}

impl<'a, F: Scalar> GazeGenerator<'a, F> {
    fn new(params: &'a SimParams) -> Self {
        Self {
            params,
            timing: stream(params.seed, 0),
            noise: stream(params.seed, 1),
            period_ms: params.sample_period_ms(),
            next_sample: 0,
            clock_ms: 0.0,
            pos: None,
        }
    }

    fn uniform(&mut self, (lo, hi): (f64, f64)) -> f64 {
        let u: f64 = self.timing.random();
        lo + u * (hi - lo)
    }

    fn gauss2(&mut self, sigma: f64) -> (f64, f64) {
        let a: f64 = self.noise.sample(StandardNormal);
        let b: f64 = self.noise.sample(StandardNormal);
        (sigma * a, sigma * b)
    }

    /// Sample times falling in `[clock, clock + duration)`; advances the clock.
    fn ticks(&mut self, duration: f64) -> Vec<f64> {
        let end = self.clock_ms + duration;
        let mut out = Vec::new();
        loop {
            let t = self.next_sample as f64 * self.period_ms;
            if t >= end {
                break;
            }
            out.push(t);
            self.next_sample += 1;
        }
        self.clock_ms = end;
        out
    }

    fn emit(&mut self, t: f64, x: f64, y: f64) -> GazeSample<F> {
        let (nx, ny) = self.gauss2(self.params.tracker_sigma_px);
        GazeSample::new(t, F::lit(x + nx), F::lit(y + ny))
    }

    fn hold(&mut self, duration: f64, out: &mut Vec<GazeSample<F>>) {
        let (x, y) = self.pos.expect("position set before holding");
        let (x, y) = (x.as_f64(), y.as_f64());
        for t in self.ticks(duration) {
            let (jx, jy) = self.gauss2(self.params.jitter_sigma_px);
            let s = self.emit(t, x + jx, y + jy);
            out.push(s);
        }
    }

    fn saccade(&mut self, to: (F, F), out: &mut Vec<GazeSample<F>>) {
        let from = self.pos.unwrap_or(to);
        let (x0, y0) = (from.0.as_f64(), from.1.as_f64());
        let (x1, y1) = (to.0.as_f64(), to.1.as_f64());
        let amplitude_deg = (x1 - x0).hypot(y1 - y0) / self.params.px_per_deg;
        let duration = self.params.saccade_ms(amplitude_deg);
        let start = self.clock_ms;
        for t in self.ticks(duration) {
            let u = (t - start) / duration;
            let s = self.emit(t, x0 + u * (x1 - x0), y0 + u * (y1 - y0));
            out.push(s);
        }
        self.pos = Some(to);
    }

    /// Latency, saccade, fixation. `extra_fixation_ms` is added after the
    /// sampled fixation, unscaled by expertise.
    fn visit(&mut self, wp: &Waypoint<F>, extra_fixation_ms: f64) -> Vec<GazeSample<F>> {
        let latency = self.uniform(self.params.latency_ms_range);
        let fixation = self.uniform(self.params.fixation_ms_range) * self.params.expertise;
        let mut out = Vec::new();
        if self.pos.is_none() {
            self.pos = Some((wp.x, wp.y));
        }
        self.hold(latency, &mut out);
        self.saccade((wp.x, wp.y), &mut out);
        self.hold(fixation + extra_fixation_ms, &mut out);
        out
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Extra time spent on a cell waypoint under the given strategy.
fn cell_extra_ms(strategy: Strategy, wp: &Waypoint<impl Scalar>) -> f64 {
    match (strategy, wp.purpose) {
        (Strategy::Dwell { dwell_ms }, Purpose::Cell { .. }) => dwell_ms,
        _ => 0.0,
    }
}

fn normalize_phrase<F: Scalar>(phrase: &str, pie: &PieMenu<F>) -> Result<String, SimError> {
    phrase
        .chars()
        .map(|c| {
            pie.layout().locate_char(c)?;
            Ok(c.to_ascii_lowercase())
        })
        .collect()
}

/// Open-loop trace that follows [`plan_waypoints`] for border-crossing entry.
pub fn synthesize<F: Scalar>(phrase: &str, pie: &PieMenu<F>, params: &SimParams) -> Result<GazeTrace<F>, SimError> {
    params.validate()?;
    let plan = plan_waypoints(phrase, pie)?;
    let mut gen = GazeGenerator::new(params);
    let samples = plan.iter().flat_map(|wp| gen.visit(wp, 0.0)).collect();
    Ok(GazeTrace::new(
        samples,
        TraceMeta {
            config: Some(*pie.config()),
            source: TraceSource::Synthetic {
                phrase: phrase.to_string(),
                strategy: Strategy::BorderCrossing,
                params: params.clone(),
            },
        },
    ))
}

/// A closed-loop simulated session.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSession<F = f64> {
    /// Lowercased target phrase.
    pub target: String,
    pub trace: GazeTrace<F>,
    pub result: SessionResult,
    /// Characters abandoned after exhausting `max_retries`.
    pub exhausted_chars: usize,
}

fn common_prefix_len(a: &[char], b: &[char]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Simulates a user typing `phrase` while watching the transcript.
///
/// After every key the user compares the buffer with what it should be. A
/// missing commit is retried. Wrong trailing characters are noticed with
/// probability `p_notice` and cleared one at a time; unnoticed ones are
/// accepted and typing moves on. Each character gets at most
/// `1 + max_retries` key attempts.
pub fn simulate_user<F: Scalar>(
    phrase: &str,
    pie: &PieMenu<F>,
    strategy: Strategy,
    params: &SimParams,
) -> Result<SimulatedSession<F>, SimError> {
    params.validate()?;
    let target: Vec<char> = normalize_phrase(phrase, pie)?.chars().collect();
    let mut engine = Engine::new(pie.clone(), strategy);
    let mut gen = GazeGenerator::new(params);
    let mut behaviour = stream(params.seed, 2);
    let mut samples = Vec::new();

    let mut accepted: Vec<char> = Vec::new();
    let mut k = 0;
    let mut attempts = 0;
    let mut exhausted = 0;
    while k < target.len() {
        let mut goal = accepted.clone();
        goal.push(target[k]);
        let current: Vec<char> = engine.buffer().chars().collect();
        if current == goal {
            accepted = goal;
            k += 1;
            attempts = 0;
            continue;
        }
        if attempts > params.max_retries {
            exhausted += 1;
            accepted = current;
            k += 1;
            attempts = 0;
            continue;
        }
        let action = if common_prefix_len(&current, &goal) < current.len() {
            if behaviour.random_bool(params.p_notice) {
                Action::ClearLast
            } else {
                accepted = current;
                k += 1;
                attempts = 0;
                continue;
            }
        } else {
            Action::for_char(goal[current.len()]).expect("phrase was validated")
        };
        attempts += 1;

        let (slice, item) = pie.layout().locate(action).expect("every action has an item");
        for wp in plan_key(pie, engine.state().focused, slice, item) {
            for s in gen.visit(&wp, cell_extra_ms(strategy, &wp)) {
                engine.step(s)?;
                samples.push(s);
            }
        }
    }

    let target: String = target.into_iter().collect();
    let trace = GazeTrace::new(
        samples,
        TraceMeta {
            config: Some(*pie.config()),
            source: TraceSource::Synthetic {
                phrase: target.clone(),
                strategy,
                params: params.clone(),
            },
        },
    );
    Ok(SimulatedSession {
        target,
        trace,
        result: engine.session_result(),
        exhausted_chars: exhausted,
    })
}

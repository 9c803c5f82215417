//! Session service: the engine behind a newline-delimited JSON protocol.
//!
//! Each line is one JSON object tagged by `"type"`. Client messages:
//!
//! | type             | fields                                                        |
//! |------------------|---------------------------------------------------------------|
//! | `hello`          | `protocol_version`                                            |
//! | `configure`      | `config?` (PieConfig), `num_slices?`, `char_width_px?`, `strategy?` |
//! | `gaze`           | `t_ms`, `x`, `y`                                              |
//! | `reset`          |                                                               |
//! | `load_trace`     | `samples` (list of `{t_ms, x, y}`)                            |
//! | `replay_control` | `command` (`play`, `pause`, `speed`), `factor?`               |
//!
//! Server messages: `layout_info`, `state`, `commit`, `metrics`, `error`
//! (`code`, `message`). Every client message gets at least one reply. The
//! first message must be `hello`; a version mismatch is answered with an
//! error and the connection is closed. Malformed lines are answered with an
//! error and the session continues.
//!
//! The server owns all interaction logic; clients only render snapshots.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineError, EventKind, GazeSample, Strategy};
use crate::geometry::{PieConfig, PieMenu, SliceSpan};
use crate::layout::{Item, Layout};
use crate::metrics::words_per_minute;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayCommand {
    Play,
    Pause,
    Speed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        protocol_version: u32,
    },
    Configure {
        #[serde(default)]
        config: Option<PieConfig<f64>>,
        #[serde(default)]
        num_slices: Option<usize>,
        #[serde(default)]
        char_width_px: Option<f64>,
        #[serde(default)]
        strategy: Option<Strategy>,
    },
    Gaze {
        t_ms: f64,
        x: f64,
        y: f64,
    },
    Reset,
    LoadTrace {
        samples: Vec<GazeSample<f64>>,
    },
    ReplayControl {
        command: ReplayCommand,
        #[serde(default)]
        factor: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    LayoutInfo {
        protocol_version: u32,
        config: PieConfig<f64>,
        strategy: Strategy,
        alpha_deg: f64,
        beta_deg: f64,
        /// Cell angle of each slice.
        cell_angles_deg: Vec<f64>,
        slices: Vec<Vec<Item>>,
        /// Spans with nothing focused.
        spans: Vec<SliceSpan<f64>>,
        /// `spans_by_focus[f]` are the spans while slice `f` is focused.
        spans_by_focus: Vec<Vec<SliceSpan<f64>>>,
    },
    State {
        focused: Option<usize>,
        highlighted: Option<usize>,
        armed: bool,
        buffer: String,
    },
    Commit {
        item: Item,
        t_ms: f64,
    },
    Metrics {
        wpm: f64,
        total_typed: usize,
        clear_count: usize,
        duration_ms: f64,
    },
    Error {
        code: String,
        message: String,
    },
}

impl ServerMessage {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

#[derive(Debug, Clone)]
struct Replay {
    samples: Vec<GazeSample<f64>>,
    next: usize,
    playing: bool,
    speed: f64,
}

/// Protocol state of one connection, independent of any transport.
#[derive(Debug, Clone)]
pub struct Session {
    greeted: bool,
    closed: bool,
    engine: Engine<f64>,
    replay: Option<Replay>,
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

fn default_engine() -> Engine<f64> {
    let pie = PieMenu::new(PieConfig::default(), Layout::build(6).expect("6 slices")).expect("default config is valid");
    Engine::new(pie, Strategy::BorderCrossing)
}

impl Session {
    pub fn new() -> Self {
        Self {
            greeted: false,
            closed: false,
            engine: default_engine(),
            replay: None,
        }
    }

    /// True once the session asked for its connection to be closed.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn engine(&self) -> &Engine<f64> {
        &self.engine
    }

    pub fn handle_line(&mut self, line: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(line) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error("bad_message", e.to_string())],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        if self.closed {
            return vec![ServerMessage::error("closed", "session is closed")];
        }
        if let ClientMessage::Hello { protocol_version } = msg {
            if protocol_version != PROTOCOL_VERSION {
                self.closed = true;
                return vec![ServerMessage::error(
                    "version_mismatch",
                    format!("server speaks protocol {PROTOCOL_VERSION}, client sent {protocol_version}"),
                )];
            }
            self.greeted = true;
            return vec![self.layout_info()];
        }
        if !self.greeted {
            return vec![ServerMessage::error("no_handshake", "send hello first")];
        }
        match msg {
            ClientMessage::Hello { .. } => unreachable!("handled above"),
            ClientMessage::Configure {
                config,
                num_slices,
                char_width_px,
                strategy,
            } => self.configure(config, num_slices, char_width_px, strategy),
            ClientMessage::Gaze { t_ms, x, y } => self.gaze(GazeSample::new(t_ms, x, y)),
            ClientMessage::Reset => {
                self.engine.reset();
                self.replay = None;
                vec![self.state()]
            }
            ClientMessage::LoadTrace { samples } => self.load_trace(samples),
            ClientMessage::ReplayControl { command, factor } => self.replay_control(command, factor),
        }
    }

    fn configure(
        &mut self,
        config: Option<PieConfig<f64>>,
        num_slices: Option<usize>,
        char_width_px: Option<f64>,
        strategy: Option<Strategy>,
    ) -> Vec<ServerMessage> {
        let mut cfg = config.unwrap_or(*self.engine.pie().config());
        if let Some(n) = num_slices {
            cfg.num_slices = n;
        }
        if let Some(w) = char_width_px {
            cfg.char_width_px = w;
        }
        let strategy = strategy.unwrap_or(self.engine.state().strategy);
        let pie = Layout::build(cfg.num_slices)
            .map_err(|e| e.to_string())
            .and_then(|layout| PieMenu::new(cfg, layout).map_err(|e| e.to_string()));
        match pie {
            Ok(pie) => {
                self.engine = Engine::new(pie, strategy);
                self.replay = None;
                vec![self.layout_info()]
            }
            Err(e) => vec![ServerMessage::error("invalid_config", e)],
        }
    }

    fn gaze(&mut self, sample: GazeSample<f64>) -> Vec<ServerMessage> {
        let events = match self.engine.step(sample) {
            Ok(events) => events,
            Err(e @ EngineError::NonMonotone { .. }) => return vec![ServerMessage::error("ts_order", e.to_string())],
            Err(e) => return vec![ServerMessage::error("bad_sample", e.to_string())],
        };
        let mut out = Vec::new();
        for ev in events {
            if let EventKind::Committed(item) = ev.kind {
                out.push(ServerMessage::Commit { item, t_ms: ev.t_ms });
                out.push(self.metrics());
            }
        }
        out.push(self.state());
        out
    }

    fn load_trace(&mut self, samples: Vec<GazeSample<f64>>) -> Vec<ServerMessage> {
        if let Some(i) = samples.windows(2).position(|w| w[1].t_ms <= w[0].t_ms) {
            return vec![ServerMessage::error(
                "ts_order",
                format!("trace sample {} does not follow its predecessor", i + 1),
            )];
        }
        self.engine.reset();
        self.replay = Some(Replay {
            samples,
            next: 0,
            playing: false,
            speed: 1.0,
        });
        vec![self.state()]
    }

    fn replay_control(&mut self, command: ReplayCommand, factor: Option<f64>) -> Vec<ServerMessage> {
        let Some(replay) = self.replay.as_mut() else {
            return vec![ServerMessage::error("no_trace", "load a trace first")];
        };
        match command {
            ReplayCommand::Play => replay.playing = true,
            ReplayCommand::Pause => replay.playing = false,
            ReplayCommand::Speed => match factor {
                Some(f) if f.is_finite() && f > 0.0 => replay.speed = f,
                _ => return vec![ServerMessage::error("bad_speed", "factor must be positive")],
            },
        }
        vec![self.state()]
    }

    /// Trace time of the next replay sample and the playback speed, while playing.
    pub fn replay_due(&self) -> Option<(f64, f64)> {
        let r = self.replay.as_ref().filter(|r| r.playing)?;
        r.samples.get(r.next).map(|s| (s.t_ms, r.speed))
    }

    /// Feeds the next replay sample through the engine.
    pub fn replay_step(&mut self) -> Vec<ServerMessage> {
        let Some(r) = self.replay.as_mut().filter(|r| r.playing) else {
            return Vec::new();
        };
        let Some(&sample) = r.samples.get(r.next) else {
            return Vec::new();
        };
        r.next += 1;
        let finished = r.next == r.samples.len();
        if finished {
            r.playing = false;
        }
        let mut out = self.gaze(sample);
        if finished {
            out.push(self.metrics());
        }
        out
    }

    pub fn layout_info(&self) -> ServerMessage {
        layout_info(self.engine.pie(), self.engine.state().strategy)
    }

    pub fn state(&self) -> ServerMessage {
        let st = self.engine.state();
        ServerMessage::State {
            focused: st.focused,
            highlighted: st.highlighted,
            armed: st.armed,
            buffer: st.buffer.clone(),
        }
    }

    pub fn metrics(&self) -> ServerMessage {
        let r = self.engine.session_result();
        ServerMessage::Metrics {
            wpm: words_per_minute(r.transcribed.chars().count(), r.duration_ms),
            total_typed: r.total_typed,
            clear_count: r.clear_count,
            duration_ms: r.duration_ms,
        }
    }
}

fn write_messages<W: Write>(w: &mut W, msgs: &[ServerMessage]) -> io::Result<()> {
    for m in msgs {
        w.write_all(m.to_line().as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Full geometry and layout of `pie`, as sent after a handshake.
pub fn layout_info(pie: &PieMenu<f64>, strategy: Strategy) -> ServerMessage {
    let cfg = *pie.config();
    let n = pie.num_slices();
    ServerMessage::LayoutInfo {
        protocol_version: PROTOCOL_VERSION,
        config: cfg,
        strategy,
        alpha_deg: cfg.alpha(),
        beta_deg: cfg.beta(),
        cell_angles_deg: (0..n).map(|s| pie.cell_angle(s)).collect(),
        slices: pie.layout().slices().to_vec(),
        spans: pie.spans(None),
        spans_by_focus: (0..n).map(|f| pie.spans(Some(f))).collect(),
    }
}

/// Serves one connection until the client disconnects or the session closes.
///
/// Lines are read on a helper thread so replay playback can be paced in
/// wall-clock time while control messages keep arriving.
pub fn session_loop<R, W>(reader: R, mut writer: W) -> io::Result<()>
where
    R: BufRead + Send + 'static,
    W: Write,
{
    let (tx, rx) = mpsc::channel::<String>();
    thread::spawn(move || {
        for line in reader.lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let mut session = Session::new();
    // (wall anchor, trace anchor, speed) of the current playback.
    let mut anchor: Option<(Instant, f64, f64)> = None;
    loop {
        let due = session.replay_due();
        if due.is_none() {
            anchor = None;
        }
        let incoming = match due {
            Some((t_next, speed)) => {
                let (wall0, trace0, s) = match anchor {
                    Some(a) if a.2 == speed => a,
                    _ => {
                        let a = (Instant::now(), t_next, speed);
                        anchor = Some(a);
                        a
                    }
                };
                let wait = ((t_next - trace0) / s).max(0.0);
                let deadline = wall0 + Duration::from_secs_f64(wait / 1000.0);
                match rx.recv_timeout(deadline.saturating_duration_since(Instant::now())) {
                    Ok(line) => Some(line),
                    Err(RecvTimeoutError::Timeout) => None,
                    Err(RecvTimeoutError::Disconnected) => break,
                }
            }
            None => match rx.recv() {
                Ok(line) => Some(line),
                Err(_) => break,
            },
        };
        let out = match incoming {
            Some(line) if line.trim().is_empty() => continue,
            Some(line) => {
                let out = session.handle_line(&line);
                // Pause, play and speed changes restart pacing from the next sample.
                anchor = None;
                out
            }
            None => session.replay_step(),
        };
        write_messages(&mut writer, &out)?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

/// TCP front end: one thread and one [`Session`] per connection.
pub struct Server {
    listener: TcpListener,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            thread::spawn(move || {
                let _ = handle_connection(stream);
            });
        }
        Ok(())
    }
}

fn handle_connection(stream: TcpStream) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let reader = BufReader::new(stream.try_clone()?);
    let result = session_loop(reader, io::BufWriter::new(stream.try_clone()?));
    // The reader thread holds its own handle, so close both directions here.
    let _ = stream.shutdown(Shutdown::Both);
    result
}

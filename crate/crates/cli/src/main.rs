use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quickpie_core::engine::replay;
use quickpie_core::service::{self, Server};
use quickpie_core::simulator::simulate_user;
use quickpie_core::sweep::{run_sweep, to_csv, SweepSpec};
use quickpie_core::{GazeTrace, Layout, PieConfig, PieMenu, SimParams, Strategy};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "quickpie",
    version,
    about = "Gaze typing on a pie menu: simulate, replay, sweep and serve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a user typing a phrase and report metrics.
    Simulate(SimulateArgs),
    /// Run a recorded or synthetic trace through the engine.
    Replay(ReplayArgs),
    /// Run a parameter sweep and print CSV.
    Sweep(SweepArgs),
    /// Print the menu layout and slice spans.
    Layout(LayoutArgs),
    /// Serve sessions over TCP (newline-delimited JSON).
    Serve(ServeArgs),
}

/// Menu geometry overrides.
#[derive(Args, Default)]
struct ConfigArgs {
    #[arg(long)]
    slices: Option<usize>,
    #[arg(long)]
    char_width: Option<f64>,
    #[arg(long)]
    safe_width: Option<f64>,
    #[arg(long)]
    selection_width: Option<f64>,
    #[arg(long)]
    pie_radius: Option<f64>,
    /// Expansion of the focused slice on each side, in degrees.
    #[arg(long)]
    expand: Option<f64>,
}

impl ConfigArgs {
    fn apply(&self, mut cfg: PieConfig<f64>) -> PieConfig<f64> {
        if let Some(n) = self.slices {
            cfg.num_slices = n;
        }
        if let Some(v) = self.char_width {
            cfg.char_width_px = v;
        }
        if let Some(v) = self.safe_width {
            cfg.safe_width_px = v;
        }
        if let Some(v) = self.selection_width {
            cfg.selection_width_px = v;
        }
        if let Some(v) = self.pie_radius {
            cfg.pie_radius_px = v;
        }
        if let Some(v) = self.expand {
            cfg.expand_deg = v;
        }
        cfg
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    phrase: String,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `border_crossing` or `dwell:<ms>`.
    #[arg(long, default_value = "border_crossing")]
    strategy: Strategy,
    /// Fixation jitter, px.
    #[arg(long)]
    jitter: Option<f64>,
    /// Tracker noise, px.
    #[arg(long)]
    tracker: Option<f64>,
    #[arg(long)]
    p_notice: Option<f64>,
    #[arg(long)]
    expertise: Option<f64>,
    /// Write the gaze trace here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    trace: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Phrase to score against; defaults to the phrase in the trace header.
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep spec.
    spec: Option<PathBuf>,
    /// Built-in sweep: slices, width or selection.
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LayoutArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 7878)]
    port: u16,
}

fn build_pie(cfg: PieConfig<f64>) -> Result<PieMenu<f64>, String> {
    let layout = Layout::build(cfg.num_slices).map_err(|e| e.to_string())?;
    let pie = PieMenu::new(cfg, layout).map_err(|e| e.to_string())?;
    if cfg.is_heavily_overlapping() {
        eprintln!(
            "quickpie: warning: expanded slice ({:.1} deg) covers more than two unexpanded slices",
            cfg.beta()
        );
    }
    Ok(pie)
}

fn read_file(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => format!("file not found: {}", path.display()),
        _ => format!("{}: {e}", path.display()),
    })
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn simulate(args: SimulateArgs) -> Result<(), String> {
    let pie = build_pie(args.config.apply(PieConfig::default()))?;
    let mut params = SimParams::default().with_seed(args.seed);
    if let Some(v) = args.jitter {
        params.jitter_sigma_px = v;
    }
    if let Some(v) = args.tracker {
        params.tracker_sigma_px = v;
    }
    if let Some(v) = args.p_notice {
        params.p_notice = v;
    }
    if let Some(v) = args.expertise {
        params.expertise = v;
    }
    let session = simulate_user(&args.phrase, &pie, args.strategy, &params).map_err(|e| e.to_string())?;
    let metrics = session.result.metrics(&session.target).map_err(|e| e.to_string())?;
    if let Some(path) = &args.out {
        session
            .trace
            .save(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let report = json!({
        "target": session.target,
        "transcribed": session.result.transcribed,
        "strategy": args.strategy,
        "samples": session.trace.len(),
        "duration_ms": session.result.duration_ms,
        "exhausted_chars": session.exhausted_chars,
        "trace": args.out,
        "metrics": metrics,
    });
    emit(&pretty(&report));
    Ok(())
}

fn replay_cmd(args: ReplayArgs) -> Result<(), String> {
    let trace = GazeTrace::<f64>::load(&args.trace).map_err(|e| e.to_string())?;
    let meta = trace.meta();
    let base = meta.config.unwrap_or_default();
    let pie = build_pie(args.config.apply(base))?;
    let header_strategy = match &meta.source {
        quickpie_core::trace::TraceSource::Synthetic { strategy, .. } => Some(*strategy),
        quickpie_core::trace::TraceSource::Recorded { .. } => None,
    };
    let strategy = args.strategy.or(header_strategy).unwrap_or(Strategy::BorderCrossing);
    let result = replay(trace.samples(), &pie, strategy).map_err(|e| e.to_string())?;
    let target = args.target.as_deref().or(meta.phrase());
    let metrics = match target {
        Some(t) => Some(result.metrics(t).map_err(|e| e.to_string())?),
        None => None,
    };
    let report = json!({
        "strategy": strategy,
        "target": target,
        "result": result,
        "metrics": metrics,
    });
    emit(&pretty(&report));
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), String> {
    let spec = match (&args.spec, &args.preset) {
        (Some(path), _) => SweepSpec::from_toml(&read_file(path)?).map_err(|e| e.to_string())?,
        (None, Some(name)) => SweepSpec::preset(name).map_err(|e| e.to_string())?,
        (None, None) => return Err("sweep needs a spec file or --preset".into()),
    };
    let rows = run_sweep(&spec).map_err(|e| e.to_string())?;
    for row in &rows {
        if let Err(e) = &row.outcome {
            eprintln!(
                "quickpie: warning: cell slices={} width={} {}: {e}",
                row.slices, row.width_px, row.strategy
            );
        }
    }
    let csv = to_csv(&rows);
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?,
        None => emit(&csv),
    }
    Ok(())
}

fn layout_text(pie: &PieMenu<f64>) -> String {
    let cfg = pie.config();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} slices, alpha {:.2} deg, beta {:.2} deg",
        cfg.num_slices,
        cfg.alpha(),
        cfg.beta()
    );
    let _ = writeln!(
        out,
        "rings: pie <= {}, chars <= {}, safe <= {}, selection <= {} px",
        cfg.pie_radius_px,
        cfg.char_outer_radius(),
        cfg.safe_outer_radius(),
        cfg.selection_outer_radius()
    );
    for s in 0..pie.num_slices() {
        let span = pie.span(s, None);
        let wide = pie.expanded_span(s);
        let labels: Vec<&str> = pie.layout().slices()[s].iter().map(|it| it.label.as_str()).collect();
        let _ = writeln!(
            out,
            "slice {s}: [{:.2}, {:.2}) focused [{:.2}, {:.2}) cell {:.2} deg: {}",
            span.start,
            span.end,
            wide.start,
            wide.end,
            pie.cell_angle(s),
            labels.join(" ")
        );
    }
    out
}

fn layout(args: LayoutArgs) -> Result<(), String> {
    let pie = build_pie(args.config.apply(PieConfig::default()))?;
    if args.json {
        let info = service::layout_info(&pie, Strategy::BorderCrossing);
        let value = serde_json::to_value(info).expect("layout serializes");
        emit(&pretty(&value));
    } else {
        emit(&layout_text(&pie));
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), String> {
    let addr = format!("{}:{}", args.host, args.port);
    let server = Server::bind(&addr).map_err(|e| format!("cannot bind {addr}: {e}"))?;
    let local = server.local_addr().map_err(|e| e.to_string())?;
    eprintln!("quickpie: listening on {local}");
    server.run().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("bad arguments");
            eprintln!("quickpie: error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Replay(a) => replay_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Layout(a) => layout(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quickpie: error: {e}");
            ExitCode::FAILURE
        }
    }
}

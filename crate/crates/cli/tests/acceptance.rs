//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use quickpie_core::engine::SelectionTrigger;
use quickpie_core::geometry::point_at;
use quickpie_core::metrics::words_per_minute;
use quickpie_core::simulator::simulate_user;
use quickpie_core::sweep::{run_sweep, to_csv, SweepSpec, DEFAULT_PHRASES};
use quickpie_core::{
    edit_distance, Engine, EventKind, GazeSample, Layout, PieConfig, PieMenu, SessionResult, SimParams, Strategy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

const PHRASE_30: &str = "the quick brown fox jumps over";

fn pie(cfg: PieConfig<f64>) -> PieMenu<f64> {
    PieMenu::new(cfg, Layout::build(cfg.num_slices).unwrap()).unwrap()
}

fn random_config(rng: &mut ChaCha8Rng) -> PieConfig<f64> {
    let n = rng.random_range(2..=14usize);
    let alpha = 360.0 / n as f64;
    let max_expand = if n == 2 { alpha / 2.0 } else { alpha };
    PieConfig {
        num_slices: n,
        pie_radius_px: rng.random_range(40.0..400.0),
        char_width_px: rng.random_range(10.0..200.0),
        safe_width_px: if rng.random_bool(0.2) {
            0.0
        } else {
            rng.random_range(0.0..60.0)
        },
        selection_width_px: rng.random_range(10.0..200.0),
        expand_deg: rng.random_range(0.0..max_expand * 0.999),
        center_x_px: rng.random_range(-200.0..1600.0),
        center_y_px: rng.random_range(-200.0..1000.0),
    }
}

fn geometry_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x51ce);
    let (configs, per_config) = (25, 4_000);
    let mut disagreements = Vec::new();
    for _ in 0..configs {
        let cfg = random_config(&mut rng);
        let pie = pie(cfg);
        let reach = cfg.selection_outer_radius() * 1.2;
        for _ in 0..per_config {
            let focus = rng.random_range(0..=cfg.num_slices);
            let focus = (focus < cfg.num_slices).then_some(focus);
            let x = cfg.center_x_px + rng.random_range(-reach..reach);
            let y = cfg.center_y_px + rng.random_range(-reach..reach);
            let got = pie.hit_test(focus, x, y).kind;
            let want = oracle::classify(&cfg, pie.layout(), focus, x, y);
            if got != want {
                disagreements.push(format!("{cfg:?} focus {focus:?} ({x}, {y}): {got:?} vs {want:?}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let total = configs * per_config;
    ensure!(
        disagreements.is_empty(),
        "{} disagreements, first: {}",
        disagreements.len(),
        disagreements[0]
    );
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:.2?}");
    Ok(format!(
        "{total} points, {configs} configs, 0 disagreements in {elapsed:.2?}"
    ))
}

fn reference_constants() -> Outcome {
    let cfg = PieConfig::<f64>::default();
    let p = pie(cfg);
    ensure!(cfg.alpha() == 60.0, "alpha {}", cfg.alpha());
    ensure!(cfg.beta() == 100.0, "beta {}", cfg.beta());
    for s in 0..5 {
        ensure!(p.cell_angle(s) == 20.0, "gamma of slice {s} is {}", p.cell_angle(s));
    }
    for n in 2..=14 {
        let base = PieConfig::<f64>::default().with_slices(n);
        let alpha = base.alpha();
        let at_limit = PieConfig {
            expand_deg: alpha,
            ..base
        };
        ensure!(at_limit.validate().is_err(), "beta = 3 alpha accepted for n = {n}");
        let beyond = PieConfig {
            expand_deg: alpha * 1.5,
            ..base
        };
        ensure!(beyond.validate().is_err(), "beta > 3 alpha accepted for n = {n}");
    }
    Ok("alpha 60, beta 100, gamma 20; beta >= 3 alpha rejected for n = 2..14".into())
}

fn layout_fidelity() -> Outcome {
    let layout = Layout::build(6).map_err(|e| e.to_string())?;
    let got: Vec<Vec<&str>> = layout
        .slices()
        .iter()
        .map(|s| s.iter().map(|it| it.label.as_str()).collect())
        .collect();
    let want = vec![
        vec!["A", "B", "C", "D", "E"],
        vec!["F", "G", "H", "I", "J"],
        vec!["K", "L", "M", "N", "O"],
        vec!["P", "Q", "R", "S", "T"],
        vec!["U", "V", "W", "X", "Y"],
        vec!["Z", "SPACE", "CLEAR"],
    ];
    ensure!(got == want, "got {got:?}");
    Ok("[ABCDE][FGHIJ][KLMNO][PQRST][UVWXY][Z SPACE CLEAR]".into())
}

/// Focus slice 1, highlight G, then wobble across the character ring's
/// outer edge twice before settling in the selection ring.
fn oscillation_commits(safe_width_px: f64, trigger: SelectionTrigger) -> usize {
    let cfg = PieConfig::<f64>::default().with_safe_width(safe_width_px);
    let mut engine = Engine::new(pie(cfg), Strategy::BorderCrossing).with_trigger(trigger);
    let path = [
        (90.0, 150.0),
        (70.0, 290.0),
        (70.0, 345.0),
        (70.0, 330.0),
        (70.0, 345.0),
        (70.0, 400.0),
    ];
    let mut commits = 0;
    for (k, &(theta, r)) in path.iter().enumerate() {
        let (x, y) = point_at(&cfg, theta, r);
        let events = engine.step(GazeSample::new(k as f64 * 50.0, x, y)).unwrap();
        commits += events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Committed(_)))
            .count();
    }
    commits
}

fn debounce() -> Outcome {
    let naive = oscillation_commits(0.0, SelectionTrigger::EveryEntry);
    let armed = oscillation_commits(20.0, SelectionTrigger::Armed);
    ensure!(naive == 2, "naive variant committed {naive} times");
    ensure!(armed == 1, "armed variant with safe ring committed {armed} times");
    Ok("no safe ring, every entry: 2 commits; 20 px safe ring, arming: 1 commit".into())
}

fn preset_cells() -> Vec<(usize, f64, Strategy)> {
    let mut cells = Vec::new();
    for n in 4..=7 {
        for w in [80.0, 100.0, 120.0, 140.0] {
            for s in [Strategy::BorderCrossing, Strategy::DWELL_400] {
                cells.push((n, w, s));
            }
        }
    }
    cells
}

fn zero_noise_closed_loop() -> Outcome {
    assert_eq!(PHRASE_30.len(), 30);
    let params = SimParams::default().noiseless().with_seed(1);
    let cells = preset_cells();
    for &(n, w, s) in &cells {
        let p = pie(PieConfig::default().with_slices(n).with_char_width(w));
        let session = simulate_user(PHRASE_30, &p, s, &params).map_err(|e| e.to_string())?;
        let m = session.result.metrics(&session.target).map_err(|e| e.to_string())?;
        ensure!(
            session.result.transcribed == PHRASE_30 && m.uncorrected_error_pct == 0.0,
            "{n} slices, {w} px, {s}: typed {:?}",
            session.result.transcribed
        );
    }
    Ok(format!("{} cells transcribed exactly", cells.len()))
}

fn strategy_ordering() -> Outcome {
    let mut pairs = 0;
    for &(n, w, s) in &preset_cells() {
        if s != Strategy::BorderCrossing {
            continue;
        }
        let p = pie(PieConfig::default().with_slices(n).with_char_width(w));
        for seed in 1..=3 {
            let params = SimParams::default().noiseless().with_seed(seed);
            let run = |strategy| -> Result<f64, String> {
                let session = simulate_user(PHRASE_30, &p, strategy, &params).map_err(|e| e.to_string())?;
                Ok(session.result.metrics(&session.target).map_err(|e| e.to_string())?.wpm)
            };
            let (bc, dwell) = (run(Strategy::BorderCrossing)?, run(Strategy::DWELL_400)?);
            ensure!(
                dwell < bc,
                "{n} slices, {w} px, seed {seed}: dwell {dwell:.3} wpm vs {bc:.3}"
            );
            pairs += 1;
        }
    }
    Ok(format!("dwell slower in all {pairs} paired sessions"))
}

fn noise_monotonicity() -> Outcome {
    let start = Instant::now();
    let p = pie(PieConfig::default());
    let phrase = DEFAULT_PHRASES[0];
    let mut means = Vec::new();
    for sigma in [0.0, 5.0, 10.0, 20.0] {
        let mut total = 0.0;
        for seed in 1..=50 {
            // Errors go unnoticed so that they stay in the transcription.
            let params = SimParams {
                jitter_sigma_px: sigma,
                p_notice: 0.0,
                ..SimParams::default().with_seed(seed)
            };
            let session = simulate_user(phrase, &p, Strategy::BorderCrossing, &params).map_err(|e| e.to_string())?;
            total += session
                .result
                .metrics(&session.target)
                .map_err(|e| e.to_string())?
                .uncorrected_error_pct;
        }
        means.push(total / 50.0);
    }
    let elapsed = start.elapsed();
    let text = means.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(" <= ");
    ensure!(means.windows(2).all(|w| w[0] <= w[1]), "means {text}");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:.2?}");
    Ok(format!("mean uncorrected error % {text} in {elapsed:.2?}"))
}

fn determinism() -> Outcome {
    let spec = SweepSpec {
        seeds: (1..=3).collect(),
        ..SweepSpec::preset("slices").map_err(|e| e.to_string())?
    };
    let a = to_csv(&run_sweep(&spec).map_err(|e| e.to_string())?);
    let b = to_csv(&run_sweep(&spec).map_err(|e| e.to_string())?);
    ensure!(a == b, "library sweep differs between runs");

    let dir = std::env::temp_dir().join(format!("quickpie-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let spec_path = dir.join("spec.toml");
    let toml = "slice_counts = [5, 6]\nchar_widths_px = [100, 120]\nstrategies = [\"border_crossing\", \"dwell:400\"]\nseeds = [1, 2]\nphrases = [\"pack my box\"]\n";
    std::fs::write(&spec_path, toml).map_err(|e| e.to_string())?;
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_quickpie"))
            .arg("sweep")
            .arg(&spec_path)
            .output()
            .map_err(|e| e.to_string())
    };
    let (x, y) = (run()?, run()?);
    let _ = std::fs::remove_dir_all(&dir);
    ensure!(x.status.success(), "sweep exited with {}", x.status);
    ensure!(x.stdout == y.stdout, "binary sweep differs between runs");
    Ok(format!(
        "library ({} rows) and binary ({} rows) CSV byte-identical",
        a.lines().count() - 1,
        x.stdout.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count() - 1
    ))
}

fn brute_distance(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = brute_distance(ra, rb) + usize::from(x != y);
            sub.min(brute_distance(ra, b) + 1).min(brute_distance(a, rb) + 1)
        }
    }
}

fn all_strings(alphabet: &[u8], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alphabet {
                next.push(format!("{s}{}", c as char));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn metrics_arithmetic() -> Outcome {
    let wpm = words_per_minute(11, 60_000.0);
    ensure!((wpm - 2.2).abs() <= 1e-9, "wpm {wpm}");
    let result = SessionResult {
        transcribed: "hello world".into(),
        duration_ms: 60_000.0,
        total_typed: 11,
        ..SessionResult::empty()
    };
    let m = result.metrics("hello world").map_err(|e| e.to_string())?;
    ensure!((m.wpm - 2.2).abs() <= 1e-9, "session wpm {}", m.wpm);

    // Exhaustive over {a, b} up to length 6.
    let words = all_strings(b"ab", 6);
    let mut pairs = 0;
    for a in &words {
        for b in &words {
            let d = edit_distance(a, b);
            ensure!(d == brute_distance(a.as_bytes(), b.as_bytes()), "d({a:?}, {b:?}) = {d}");
            ensure!(d == edit_distance(b, a), "asymmetric on {a:?}, {b:?}");
            ensure!((d == 0) == (a == b), "identity fails on {a:?}, {b:?}");
            ensure!(
                d >= a.len().abs_diff(b.len()) && d <= a.len().max(b.len()),
                "bounds on {a:?}, {b:?}"
            );
            pairs += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let word = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.random_range(0..=6);
        (0..len).map(|_| (b'a' + rng.random_range(0..4u8)) as char).collect()
    };
    for _ in 0..20_000 {
        let (a, b, c) = (word(&mut rng), word(&mut rng), word(&mut rng));
        let (ab, bc, ac) = (edit_distance(&a, &b), edit_distance(&b, &c), edit_distance(&a, &c));
        ensure!(ac <= ab + bc, "triangle fails on {a:?}, {b:?}, {c:?}");
        ensure!(
            ab == brute_distance(a.as_bytes(), b.as_bytes()),
            "d({a:?}, {b:?}) = {ab}"
        );
    }
    Ok(format!("wpm 2.2; {pairs} exhaustive pairs and 20000 random triples"))
}

fn main() -> ExitCode {
    let criteria: &[(&str, Check)] = &[
        ("geometry oracle equivalence", geometry_oracle),
        ("reference constants", reference_constants),
        ("six-slice layout", layout_fidelity),
        ("safe ring debounce", debounce),
        ("zero-noise closed loop", zero_noise_closed_loop),
        ("strategy ordering", strategy_ordering),
        ("noise monotonicity", noise_monotonicity),
        ("sweep determinism", determinism),
        ("metrics arithmetic", metrics_arithmetic),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Brute-force region classifier used to check `PieMenu::hit_test`.
//!
//! It works from the definitions only: the focused slice owns
//! `[c - β/2, c + β/2)` around its unexpanded center `c`, every other slice
//! owns what is left of `[iα, (i+1)α)`, and cells tile the expanded span.
//! Intervals are split at 0°/360° and scanned linearly.

#![allow(dead_code)]

use quickpie_core::{Layout, PieConfig, RegionKind};

/// Half-open `[a, b)` pieces of an arc, all inside `[0, 360)`.
fn pieces(a: f64, b: f64) -> Vec<(f64, f64)> {
    let width = b - a;
    let start = a.rem_euclid(360.0);
    if start + width <= 360.0 {
        vec![(start, start + width)]
    } else {
        vec![(start, 360.0), (0.0, start + width - 360.0)]
    }
}

fn in_arc(theta: f64, a: f64, b: f64) -> bool {
    pieces(a, b).iter().any(|&(lo, hi)| lo <= theta && theta < hi)
}

/// Clockwise-from-north angle via the counter-clockwise-from-east angle.
pub fn theta_deg(cfg: &PieConfig<f64>, x: f64, y: f64) -> f64 {
    let dx = x - cfg.center_x_px;
    let up = cfg.center_y_px - y;
    if dx == 0.0 && up == 0.0 {
        return 0.0;
    }
    let east_ccw = up.atan2(dx).to_degrees();
    let t = (90.0 - east_ccw).rem_euclid(360.0);
    if t >= 360.0 {
        0.0
    } else {
        t
    }
}

pub fn classify(cfg: &PieConfig<f64>, layout: &Layout, focused: Option<usize>, x: f64, y: f64) -> RegionKind {
    let n = cfg.num_slices;
    let alpha = 360.0 / n as f64;
    let beta = alpha + 2.0 * cfg.expand_deg;
    let r = ((x - cfg.center_x_px).powi(2) + (y - cfg.center_y_px).powi(2)).sqrt();
    let theta = theta_deg(cfg, x, y);

    let focus_arc = focused.map(|f| {
        let c = (f as f64 + 0.5) * alpha;
        (f, c - beta / 2.0, c + beta / 2.0)
    });
    let in_focus = focus_arc.filter(|&(_, a, b)| in_arc(theta, a, b));

    let bands = [
        (f64::NEG_INFINITY, cfg.pie_radius_px, 0),
        (cfg.pie_radius_px, cfg.pie_radius_px + cfg.char_width_px, 1),
        (
            cfg.pie_radius_px + cfg.char_width_px,
            cfg.pie_radius_px + cfg.char_width_px + cfg.safe_width_px,
            2,
        ),
        (
            cfg.pie_radius_px + cfg.char_width_px + cfg.safe_width_px,
            cfg.pie_radius_px + cfg.char_width_px + cfg.safe_width_px + cfg.selection_width_px,
            3,
        ),
    ];
    let band = bands.iter().find(|&&(lo, hi, _)| lo < r && r <= hi).map(|&(_, _, b)| b);

    match (band, in_focus) {
        (Some(0), Some((f, _, _))) => RegionKind::PieSlice(f),
        (Some(0), None) => {
            let i = (0..n)
                .find(|&i| in_arc(theta, i as f64 * alpha, (i + 1) as f64 * alpha))
                .expect("unexpanded slices tile the circle");
            RegionKind::PieSlice(i)
        }
        (Some(1), Some((f, a, _))) => {
            let items = layout.n_items(f);
            let gamma = beta / items as f64;
            let k = (0..items)
                .find(|&k| in_arc(theta, a + k as f64 * gamma, a + (k + 1) as f64 * gamma))
                .unwrap_or(items - 1);
            RegionKind::CharCell(k)
        }
        (Some(2), Some(_)) => RegionKind::Safe,
        (Some(3), Some(_)) => RegionKind::Selection,
        _ => RegionKind::Background,
    }
}

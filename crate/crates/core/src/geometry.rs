//! Angular and radial pie geometry.
//!
//! Angles are in degrees, measured clockwise from 12 o'clock, with screen
//! `y` pointing down. Slice `i` of an unfocused pie spans `[i·α, (i+1)·α)`.
//! Focusing slice `f` widens it by `expand_deg` on each side, taken from its
//! two neighbours, so its span becomes `β = α + 2·expand_deg` wide.
//!
//! Radially the interface is a stack of half-open bands, inner edge owned by
//! the inner band:
//!
//! ```text
//! [0, R]            pie disk
//! (R, R+Wc]         character ring  (focused slice only)
//! (.., +Ws]         safe ring       (focused slice only)
//! (.., +Wsel]       selection ring  (focused slice only)
//! ```
//!
//! Everything else is background.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::Layout;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("num_slices must be at least 2, got {0}")]
    TooFewSlices(usize),
    #[error("{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be non-negative and finite, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("expanded angle {beta}° must be below 3α = {limit}°")]
    ExpansionTooWide { beta: f64, limit: f64 },
    #[error("expansion of {expand}° per side leaves no span for neighbours of a {alpha}° slice")]
    NeighbourSwallowed { expand: f64, alpha: f64 },
    #[error("layout has {layout} slices but config has {config}")]
    LayoutMismatch { layout: usize, config: usize },
    #[error("slice {0} out of range")]
    SliceIndex(usize),
    #[error("item {item} out of range for slice {slice}")]
    ItemIndex { slice: usize, item: usize },
}

/// Every geometric parameter of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct PieConfig<F = f64> {
    pub num_slices: usize,
    pub pie_radius_px: F,
    pub char_width_px: F,
    pub safe_width_px: F,
    pub selection_width_px: F,
    /// Expansion of the focused slice on each side, in degrees.
    pub expand_deg: F,
    pub center_x_px: F,
    pub center_y_px: F,
}

impl<F: Scalar> Default for PieConfig<F> {
    fn default() -> Self {
        Self {
            num_slices: 6,
            pie_radius_px: F::lit(240.0),
            char_width_px: F::lit(100.0),
            safe_width_px: F::lit(20.0),
            selection_width_px: F::lit(120.0),
            expand_deg: F::lit(20.0),
            center_x_px: F::lit(682.0),
            center_y_px: F::lit(384.0),
        }
    }
}

impl<F: Scalar> PieConfig<F> {
    pub fn with_slices(mut self, num_slices: usize) -> Self {
        self.num_slices = num_slices;
        self
    }

    pub fn with_char_width(mut self, px: F) -> Self {
        self.char_width_px = px;
        self
    }

    pub fn with_safe_width(mut self, px: F) -> Self {
        self.safe_width_px = px;
        self
    }

    pub fn with_center(mut self, x: F, y: F) -> Self {
        self.center_x_px = x;
        self.center_y_px = y;
        self
    }

    /// Unexpanded slice angle α.
    pub fn alpha(&self) -> F {
        F::lit(360.0) / F::from_usize_lossy(self.num_slices)
    }

    /// Expanded angle β of the focused slice.
    pub fn beta(&self) -> F {
        self.alpha() + F::lit(2.0) * self.expand_deg
    }

    pub fn char_outer_radius(&self) -> F {
        self.pie_radius_px + self.char_width_px
    }

    pub fn safe_outer_radius(&self) -> F {
        self.char_outer_radius() + self.safe_width_px
    }

    pub fn selection_outer_radius(&self) -> F {
        self.safe_outer_radius() + self.selection_width_px
    }

    /// β above 2α: neighbours of the focused slice lose more than half their area.
    pub fn is_heavily_overlapping(&self) -> bool {
        self.beta() > F::lit(2.0) * self.alpha()
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.num_slices < 2 {
            return Err(GeometryError::TooFewSlices(self.num_slices));
        }
        for (field, value) in [
            ("pie_radius_px", self.pie_radius_px),
            ("char_width_px", self.char_width_px),
            ("selection_width_px", self.selection_width_px),
        ] {
            if !(value.is_finite() && value > F::zero()) {
                return Err(GeometryError::NonPositive {
                    field,
                    value: value.as_f64(),
                });
            }
        }
        for (field, value) in [("safe_width_px", self.safe_width_px), ("expand_deg", self.expand_deg)] {
            if !(value.is_finite() && value >= F::zero()) {
                return Err(GeometryError::Negative {
                    field,
                    value: value.as_f64(),
                });
            }
        }
        if !(self.center_x_px.is_finite() && self.center_y_px.is_finite()) {
            return Err(GeometryError::NonPositive {
                field: "center",
                value: f64::NAN,
            });
        }
        let alpha = self.alpha();
        let beta = self.beta();
        if beta >= F::lit(3.0) * alpha {
            return Err(GeometryError::ExpansionTooWide {
                beta: beta.as_f64(),
                limit: (F::lit(3.0) * alpha).as_f64(),
            });
        }
        // With two slices the single neighbour loses area on both sides.
        let lost = if self.num_slices == 2 {
            F::lit(2.0) * self.expand_deg
        } else {
            self.expand_deg
        };
        if lost >= alpha {
            return Err(GeometryError::NeighbourSwallowed {
                expand: self.expand_deg.as_f64(),
                alpha: alpha.as_f64(),
            });
        }
        Ok(())
    }
}

/// A direction in degrees, normalized into `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Angle<F = f64>(F);

impl<F: Scalar> Angle<F> {
    pub fn new(degrees: F) -> Self {
        Angle(normalize_deg(degrees))
    }

    pub fn degrees(self) -> F {
        self.0
    }
}

/// Maps any finite angle into `[0, 360)`.
pub fn normalize_deg<F: Scalar>(deg: F) -> F {
    let full = F::lit(360.0);
    let r = deg % full;
    let r = if r < F::zero() { r + full } else { r };
    // `-tiny + 360` rounds to 360.
    if r >= full {
        F::zero()
    } else {
        r
    }
}

/// Angular extent of one slice. `start` may be negative; `end - start` is the width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct SliceSpan<F = f64> {
    pub slice: usize,
    pub start: F,
    pub end: F,
}

impl<F: Scalar> SliceSpan<F> {
    pub fn width(&self) -> F {
        self.end - self.start
    }

    pub fn start_angle(&self) -> Angle<F> {
        Angle::new(self.start)
    }

    pub fn center(&self) -> Angle<F> {
        Angle::new((self.start + self.end) / F::lit(2.0))
    }

    /// Start-inclusive, end-exclusive membership modulo 360.
    pub fn contains(&self, theta: Angle<F>) -> bool {
        offset_from(self.start, theta) < self.width()
    }
}

#[inline]
fn offset_from<F: Scalar>(start: F, theta: Angle<F>) -> F {
    normalize_deg(theta.degrees() - start)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum RegionKind {
    PieSlice(usize),
    CharCell(usize),
    Safe,
    Selection,
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RegionHit<F = f64> {
    pub kind: RegionKind,
    pub r_px: F,
    pub theta: Angle<F>,
}

/// Polar coordinates of `(x, y)` about the pie center. The center itself maps to θ = 0.
pub fn polar<F: Scalar>(cfg: &PieConfig<F>, x: F, y: F) -> (F, Angle<F>) {
    let dx = x - cfg.center_x_px;
    let dy = y - cfg.center_y_px;
    let r = dx.hypot(dy);
    if r == F::zero() {
        return (r, Angle::new(F::zero()));
    }
    (r, Angle::new(dx.atan2(-dy).to_degrees()))
}

/// Screen point at angle `theta` and distance `r` from the pie center.
pub fn point_at<F: Scalar>(cfg: &PieConfig<F>, theta: F, r: F) -> (F, F) {
    let rad = theta.to_radians();
    (cfg.center_x_px + r * rad.sin(), cfg.center_y_px - r * rad.cos())
}

fn spans_unchecked<F: Scalar>(cfg: &PieConfig<F>, focused: Option<usize>) -> Vec<SliceSpan<F>> {
    let n = cfg.num_slices;
    let alpha = cfg.alpha();
    // boundary[i] is the start of slice i; boundary[n] wraps to boundary[0] + 360.
    let mut boundary: Vec<F> = (0..n).map(|i| F::from_usize_lossy(i) * alpha).collect();
    if let Some(f) = focused.filter(|&f| f < n) {
        boundary[f] = boundary[f] - cfg.expand_deg;
        if f + 1 < n {
            boundary[f + 1] = boundary[f + 1] + cfg.expand_deg;
        } else {
            boundary[0] = boundary[0] + cfg.expand_deg;
        }
    }
    let wrap = boundary[0] + F::lit(360.0);
    (0..n)
        .map(|i| SliceSpan {
            slice: i,
            start: boundary[i],
            end: boundary.get(i + 1).copied().unwrap_or(wrap),
        })
        .collect()
}

/// Angular spans of all slices, with `focused` expanded.
pub fn slice_spans<F: Scalar>(cfg: &PieConfig<F>, focused: Option<usize>) -> Result<Vec<SliceSpan<F>>, GeometryError> {
    cfg.validate()?;
    if let Some(f) = focused.filter(|&f| f >= cfg.num_slices) {
        return Err(GeometryError::SliceIndex(f));
    }
    Ok(spans_unchecked(cfg, focused))
}

/// Classifies a screen point. See [`PieMenu::hit_test`].
pub fn hit_test<F: Scalar>(
    cfg: &PieConfig<F>,
    layout: &Layout,
    focused: Option<usize>,
    x: F,
    y: F,
) -> Result<RegionHit<F>, GeometryError> {
    let pie = PieMenu::new(*cfg, layout.clone())?;
    if let Some(f) = focused.filter(|&f| f >= cfg.num_slices) {
        return Err(GeometryError::SliceIndex(f));
    }
    Ok(pie.hit_test(focused, x, y))
}

/// Center of a character cell. See [`PieMenu::cell_center`].
pub fn cell_center<F: Scalar>(
    cfg: &PieConfig<F>,
    layout: &Layout,
    focused: usize,
    item: usize,
) -> Result<(F, F), GeometryError> {
    PieMenu::new(*cfg, layout.clone())?.cell_center(focused, item)
}

/// A validated config paired with a matching layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct PieMenu<F = f64> {
    config: PieConfig<F>,
    layout: Layout,
}

impl<F: Scalar> PieMenu<F> {
    pub fn new(config: PieConfig<F>, layout: Layout) -> Result<Self, GeometryError> {
        config.validate()?;
        if layout.num_slices() != config.num_slices {
            return Err(GeometryError::LayoutMismatch {
                layout: layout.num_slices(),
                config: config.num_slices,
            });
        }
        Ok(Self { config, layout })
    }

    pub fn config(&self) -> &PieConfig<F> {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn num_slices(&self) -> usize {
        self.config.num_slices
    }

    pub fn spans(&self, focused: Option<usize>) -> Vec<SliceSpan<F>> {
        spans_unchecked(&self.config, focused)
    }

    /// Span of `slice` under the given focus.
    pub fn span(&self, slice: usize, focused: Option<usize>) -> SliceSpan<F> {
        self.spans(focused)[slice]
    }

    /// Expanded span of a focused slice.
    pub fn expanded_span(&self, slice: usize) -> SliceSpan<F> {
        let alpha = self.config.alpha();
        let start = F::from_usize_lossy(slice) * alpha - self.config.expand_deg;
        SliceSpan {
            slice,
            start,
            end: start + self.config.beta(),
        }
    }

    /// Cell angle γ of a slice: β divided by its item count.
    pub fn cell_angle(&self, slice: usize) -> F {
        self.config.beta() / F::from_usize_lossy(self.layout.n_items(slice).max(1))
    }

    /// Classifies `(x, y)` given the current focus. Total: every point gets
    /// exactly one kind. An out-of-range `focused` is treated as no focus.
    pub fn hit_test(&self, focused: Option<usize>, x: F, y: F) -> RegionHit<F> {
        let cfg = &self.config;
        let (r, theta) = polar(cfg, x, y);
        let focused = focused.filter(|&f| f < cfg.num_slices);
        let in_focus = focused.map(|f| {
            let span = self.expanded_span(f);
            (f, offset_from(span.start, theta))
        });
        let in_focus = in_focus.filter(|(_, off)| *off < cfg.beta());

        let kind = if r <= cfg.pie_radius_px {
            match in_focus {
                Some((f, _)) => RegionKind::PieSlice(f),
                None => {
                    // Outside the focused span the unexpanded partition is exact.
                    let i = (theta.degrees() / cfg.alpha()).floor().to_usize().unwrap_or(0);
                    RegionKind::PieSlice(i.min(cfg.num_slices - 1))
                }
            }
        } else if let Some((f, offset)) = in_focus {
            if r <= cfg.char_outer_radius() {
                let n = self.layout.n_items(f);
                let cell = (offset / self.cell_angle(f)).floor().to_usize().unwrap_or(0);
                RegionKind::CharCell(cell.min(n.saturating_sub(1)))
            } else if r <= cfg.safe_outer_radius() {
                RegionKind::Safe
            } else if r <= cfg.selection_outer_radius() {
                RegionKind::Selection
            } else {
                RegionKind::Background
            }
        } else {
            RegionKind::Background
        };
        RegionHit { kind, r_px: r, theta }
    }

    /// Angle through the middle of a cell of a focused slice.
    pub fn cell_theta(&self, focused: usize, item: usize) -> Result<F, GeometryError> {
        if focused >= self.num_slices() {
            return Err(GeometryError::SliceIndex(focused));
        }
        if item >= self.layout.n_items(focused) {
            return Err(GeometryError::ItemIndex { slice: focused, item });
        }
        let span = self.expanded_span(focused);
        let gamma = self.cell_angle(focused);
        Ok(normalize_deg(
            span.start + (F::from_usize_lossy(item) + F::lit(0.5)) * gamma,
        ))
    }

    /// Midpoint of an item's cell, halfway across the character ring.
    pub fn cell_center(&self, focused: usize, item: usize) -> Result<(F, F), GeometryError> {
        let theta = self.cell_theta(focused, item)?;
        let r = self.config.pie_radius_px + self.config.char_width_px / F::lit(2.0);
        Ok(point_at(&self.config, theta, r))
    }

    /// Point at angle `theta` midway across the selection ring.
    pub fn selection_point(&self, theta: F) -> (F, F) {
        let r = self.config.safe_outer_radius() + self.config.selection_width_px / F::lit(2.0);
        point_at(&self.config, theta, r)
    }
}

//! One-dimensional monotonicity functionals along lines and their
//! 𝔥-averages over balls.

use serde::{Deserialize, Serialize};

use crate::group::Ball;
use crate::lines::{region_trace, sample_lines, surface_hits, Estimate, Interval, LineSegments, TraceOptions};
use crate::regions::{Region, Surface};
use crate::error::Result;

/// A set on `B ∩ ℓ`, given as segments inside the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowedTrace {
    pub window: Interval,
    pub segments: LineSegments,
}

impl WindowedTrace {
    /// Clips and merges arbitrary intervals into a valid trace.
    pub fn new(window: Interval, raw: &[Interval]) -> Self {
        let mut ivs: Vec<Interval> = raw
            .iter()
            .map(|iv| Interval { lo: iv.lo.max(window.lo), hi: iv.hi.min(window.hi) })
            .filter(|iv| iv.hi > iv.lo)
            .collect();
        ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        WindowedTrace { window, segments: LineSegments { intervals: merged } }
    }

    pub fn complement(&self) -> WindowedTrace {
        WindowedTrace { window: self.window, segments: self.segments.complement_in(self.window) }
    }

    /// `∫_window |χ_A − χ_J|` for an interval `J` (or `None` for ∅).
    pub fn l1_to_interval(&self, j: Option<Interval>) -> f64 {
        let a = self.segments.total_length();
        let Some(j) = j else { return a };
        let lo = j.lo.max(self.window.lo);
        let hi = j.hi.min(self.window.hi);
        if hi <= lo {
            return a;
        }
        let overlap: f64 = self.segments.intervals.iter().map(|s| (s.hi.min(hi) - s.lo.max(lo)).max(0.0)).sum();
        a + (hi - lo) - 2.0 * overlap
    }
}

/// The best interval for `NC` and its cost.
///
/// With `I = [x_i, y_j]` spanning segments `i..=j` the cost is
/// `|A| + (y_j − x_i) − 2·Σ_{i..=j} len`; moving an endpoint off a segment
/// endpoint changes the cost linearly, so these candidates and `I = ∅` suffice.
pub fn nc_fit(trace: &WindowedTrace) -> (Option<Interval>, f64) {
    let segs = &trace.segments.intervals;
    let total = trace.segments.total_length();
    let mut prefix = Vec::with_capacity(segs.len() + 1);
    prefix.push(0.0);
    for s in segs {
        prefix.push(prefix[prefix.len() - 1] + s.len());
    }
    let mut best = (None, total);
    for i in 0..segs.len() {
        for j in i..segs.len() {
            let covered = prefix[j + 1] - prefix[i];
            let cost = total + (segs[j].hi - segs[i].lo) - 2.0 * covered;
            if cost < best.1 {
                best = (Some(Interval { lo: segs[i].lo, hi: segs[j].hi }), cost);
            }
        }
    }
    (best.0, best.1.max(0.0))
}

pub fn nc_line(trace: &WindowedTrace) -> f64 {
    nc_fit(trace).1
}

/// `NC(A) + NC(A^c)` on the window.
pub fn nm_line(trace: &WindowedTrace) -> f64 {
    nc_line(trace) + nc_line(&trace.complement())
}

/// A monotone subset of the line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "at", rename_all = "kebab-case")]
pub enum MonotoneSet {
    Empty,
    Full,
    /// `(−∞, x]`
    LeftRay(f64),
    /// `[x, ∞)`
    RightRay(f64),
}

impl MonotoneSet {
    fn on_window(&self, w: Interval) -> Option<Interval> {
        match *self {
            MonotoneSet::Empty => None,
            MonotoneSet::Full => Some(w),
            MonotoneSet::LeftRay(x) => Some(Interval { lo: f64::NEG_INFINITY, hi: x }),
            MonotoneSet::RightRay(x) => Some(Interval { lo: x, hi: f64::INFINITY }),
        }
    }
}

/// A monotone set within `NM` of the trace, following the case analysis on
/// the optimal intervals `I₁` (for A) and `I₂` (for A^c).
pub fn best_monotone_fit(trace: &WindowedTrace) -> (MonotoneSet, f64) {
    let w = trace.window;
    let (i1, _) = nc_fit(trace);
    let (i2, _) = nc_fit(&trace.complement());
    let set = match (i1, i2) {
        (None, _) => MonotoneSet::Empty,
        (_, None) => MonotoneSet::Full,
        (Some(i1), Some(i2)) => {
            if i1.lo <= w.lo {
                MonotoneSet::LeftRay(i1.hi)
            } else if i1.hi >= w.hi {
                MonotoneSet::RightRay(i1.lo)
            } else if i2.lo <= w.lo {
                MonotoneSet::RightRay(i2.hi)
            } else if i2.hi >= w.hi {
                MonotoneSet::LeftRay(i2.lo)
            } else if i1.lo <= i2.lo {
                MonotoneSet::LeftRay(i1.hi)
            } else {
                MonotoneSet::RightRay(i2.hi)
            }
        }
    };
    let residual = trace.l1_to_interval(set.on_window(w));
    (set, residual.max(0.0))
}

/// `diam(B ∩ E ∩ ℓ)` from the hit parameters.
pub fn width_line(hits: &[f64]) -> f64 {
    if hits.len() < 2 {
        return 0.0;
    }
    let lo = hits.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = hits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// `NM_B(A) = r^{-(2k+2)} ∫ NM_B(A, ℓ) d𝔥(ℓ)`, estimated with `n` lines.
pub fn nm_ball(region: &Region, ball: &Ball, n: usize, seed: u64, opts: &TraceOptions) -> Result<Estimate> {
    let sample = sample_lines(ball, n, seed)?;
    let est = sample.integrate(|l| {
        let (window, segs) = region_trace(&l.line, ball, region, opts);
        match window {
            Some(w) => nm_line(&WindowedTrace { window: w, segments: segs }),
            None => 0.0,
        }
    });
    Ok(est.scale(ball.radius.powi(-(2 * ball.k() as i32 + 2))))
}

/// `width_B(E) = r^{-(2k+2)} ∫ width_B(E, ℓ) d𝔥(ℓ)`; lines lying inside the
/// surface contribute nothing.
pub fn width_ball(surface: &Surface, ball: &Ball, n: usize, seed: u64, opts: &TraceOptions) -> Result<Estimate> {
    let sample = sample_lines(ball, n, seed)?;
    let est = sample.integrate(|l| {
        let h = surface_hits(&l.line, ball, surface, opts);
        if h.embedded { 0.0 } else { width_line(&h.hits) }
    });
    Ok(est.scale(ball.radius.powi(-(2 * ball.k() as i32 + 2))))
}

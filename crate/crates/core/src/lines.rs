//! Horizontal lines with their traces on sets, plus Monte Carlo integration
//! against the invariant line measure 𝔥.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frames::{vertical_project, Direction, WFrame};
use crate::group::{dot, norm2, omega, Ball, Point};
use crate::optimize::{bisect, bisect_predicate, monotone_cubic_root};
use crate::par;
use crate::regions::{Region, Surface};
use crate::rng::{self, Domain};

/// The line `base · L_ν = {base · (sν, 0) : s ∈ ℝ}` with `base ∈ W_ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalLine {
    pub base: Point,
    pub nu: Direction,
}

impl HorizontalLine {
    /// A line from a base point already in W_ν. The direction is put in
    /// canonical orientation; flipping ν reverses the parameter.
    pub fn new(base: Point, nu: Direction) -> Result<Self> {
        if base.v.len() != nu.as_slice().len() {
            return Err(Error::DimensionMismatch { expected: nu.k(), found: base.k() });
        }
        let proj = vertical_project(&nu, &base);
        if proj.dist(&base) > 1e-9 * (1.0 + base.knorm()) {
            return Err(invalid("line base point must lie in W_ν"));
        }
        Ok(HorizontalLine { base, nu: nu.canonical().0 })
    }

    /// The line `p · L_ν` through an arbitrary point.
    pub fn through(p: &Point, nu: &Direction) -> Self {
        HorizontalLine { base: vertical_project(nu, p), nu: nu.canonical().0 }
    }

    /// Parameter of a point known to lie on the line.
    pub fn parameter_of(&self, p: &Point) -> f64 {
        dot(&p.v, self.nu.as_slice())
    }

    /// `base · (sν, 0)`, which moves along a Euclidean straight line.
    #[inline]
    pub fn point(&self, s: f64) -> Point {
        let nu = self.nu.as_slice();
        let v = self.base.v.iter().zip(nu).map(|(b, n)| b + s * n).collect();
        Point { v, t: self.base.t + 0.5 * s * omega(&self.base.v, nu) }
    }

    /// The quartic `s ↦ ‖c⁻¹ · point(s)‖⁴` in shifted form.
    fn quartic(&self, c: &Point) -> LineQuartic {
        let nu = self.nu.as_slice();
        let d0: Vec<f64> = self.base.v.iter().zip(&c.v).map(|(b, x)| b - x).collect();
        let proj = dot(&d0, nu);
        let e2 = (norm2(&d0) - proj * proj).max(0.0);
        let tau1 = 0.5 * omega(&d0, nu);
        let t0 = self.base.t - c.t - 0.5 * omega(&c.v, &self.base.v);
        LineQuartic { proj, e2, tau0: t0 - tau1 * proj, tau1 }
    }

    /// Korányi distance from `q` to the line and the closest parameter.
    pub fn distance_to(&self, q: &Point) -> (f64, f64) {
        let f = self.quartic(q);
        let sigma = f.argmin();
        (f.value(sigma).sqrt().sqrt(), sigma - f.proj)
    }
}

/// `f(σ) = (σ² + e²)² + 16(τ₀ + τ₁σ)²`, with `s = σ − proj`.
struct LineQuartic {
    proj: f64,
    e2: f64,
    tau0: f64,
    tau1: f64,
}

impl LineQuartic {
    #[inline]
    fn value(&self, sigma: f64) -> f64 {
        let a = sigma * sigma + self.e2;
        let b = self.tau0 + self.tau1 * sigma;
        a * a + 16.0 * b * b
    }

    /// `f` is convex, and `f'/4 = σ³ + (e² + 8τ₁²)σ + 8τ₁τ₀`.
    fn argmin(&self) -> f64 {
        monotone_cubic_root(self.e2 + 8.0 * self.tau1 * self.tau1, 8.0 * self.tau1 * self.tau0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, s: f64, tol: f64) -> bool {
        s >= self.lo - tol && s <= self.hi + tol
    }
}

/// `{s : point(s) ∈ B}`, a closed interval or empty.
pub fn line_ball_interval(line: &HorizontalLine, ball: &Ball) -> Option<Interval> {
    let f = line.quartic(&ball.center);
    let r = ball.radius;
    let r4 = r.powi(4);
    let sigma = f.argmin();
    let fmin = f.value(sigma);
    if fmin > r4 * (1.0 + 1e-12) {
        return None;
    }
    if fmin >= r4 {
        let s = sigma - f.proj;
        return Some(Interval { lo: s, hi: s });
    }
    // f(σ) ≥ σ⁴, so the sublevel set sits inside [−r, r].
    let inside = |x: f64| f.value(x) <= r4;
    let tol = 1e-13 * r.max(1e-300);
    let lo = if inside(-r) { -r } else { bisect_predicate(inside, sigma, -r, tol) };
    let hi = if inside(r) { r } else { bisect_predicate(inside, sigma, r, tol) };
    Some(Interval { lo: lo - f.proj, hi: hi - f.proj })
}

/// Sorted, disjoint closed intervals of the line parameter.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LineSegments {
    pub intervals: Vec<Interval>,
}

impl LineSegments {
    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::len).fold(0.0, |a, b| a + b)
    }

    /// The closure of `window ∖ self`.
    pub fn complement_in(&self, window: Interval) -> LineSegments {
        let mut out = Vec::new();
        let mut cur = window.lo;
        for iv in &self.intervals {
            if iv.lo > cur {
                out.push(Interval { lo: cur, hi: iv.lo });
            }
            cur = cur.max(iv.hi);
        }
        if window.hi > cur {
            out.push(Interval { lo: cur, hi: window.hi });
        }
        LineSegments { intervals: out }
    }
}

/// Scanning controls for traces along a line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Scan step as a fraction of the ball radius.
    pub step_fraction: f64,
    pub bisection_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { step_fraction: 1.0 / 512.0, bisection_tol: 1e-9 }
    }
}

fn scan_grid(window: Interval, h: f64) -> Vec<f64> {
    let n = ((window.len() / h).ceil() as usize).max(1);
    (0..=n).map(|i| if i == n { window.hi } else { window.lo + window.len() * i as f64 / n as f64 }).collect()
}

/// `{s ∈ B ∩ ℓ : point(s) ∈ A}` as closed segments.
///
/// Membership is sampled on a uniform grid of step `h` and every change is
/// refined by bisection, so components of length at least `2h` are found.
pub fn region_trace(line: &HorizontalLine, ball: &Ball, region: &Region, opts: &TraceOptions) -> (Option<Interval>, LineSegments) {
    let Some(window) = line_ball_interval(line, ball) else {
        return (None, LineSegments::default());
    };
    let inside = |s: f64| region.contains(&line.point(s));
    if window.len() == 0.0 {
        let segs = if inside(window.lo) { vec![window] } else { vec![] };
        return (Some(window), LineSegments { intervals: segs });
    }
    let grid = scan_grid(window, opts.step_fraction * ball.radius);
    let mut intervals = Vec::new();
    let mut prev = inside(grid[0]);
    let mut start = if prev { Some(window.lo) } else { None };
    for w in grid.windows(2) {
        let cur = inside(w[1]);
        if cur != prev {
            let x = bisect_predicate(inside, w[0], w[1], opts.bisection_tol);
            if cur {
                start = Some(x);
            } else if let Some(a) = start.take() {
                intervals.push(Interval { lo: a, hi: x });
            }
            prev = cur;
        }
    }
    if let Some(a) = start {
        intervals.push(Interval { lo: a, hi: window.hi });
    }
    (Some(window), LineSegments { intervals })
}

/// Parameters where a surface crosses the line inside a ball.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LineHits {
    pub window: Option<Interval>,
    pub hits: Vec<f64>,
    /// The line lies inside the surface (an 𝔥-null event for hyperplanes).
    pub embedded: bool,
}

/// `E ∩ ℓ ∩ B` for a surface `E`.
pub fn surface_hits(line: &HorizontalLine, ball: &Ball, surface: &Surface, opts: &TraceOptions) -> LineHits {
    let Some(window) = line_ball_interval(line, ball) else {
        return LineHits::default();
    };
    let tol = 1e-12 * (1.0 + ball.radius);
    let mut out = LineHits { window: Some(window), hits: Vec::new(), embedded: false };
    match surface {
        Surface::Hyperplane(p) => {
            let f0 = p.eval(&line.base);
            let nu = line.nu.as_slice();
            let f1 = dot(p.normal_v(), nu) + p.normal_t() * 0.5 * omega(&line.base.v, nu);
            let scale = 1.0 + line.base.knorm();
            if f1.abs() <= 1e-13 * scale {
                if f0.abs() <= 1e-12 * scale {
                    out.embedded = true;
                }
            } else {
                let s = -f0 / f1;
                if window.contains(s, tol) {
                    out.hits.push(s.clamp(window.lo, window.hi));
                }
            }
        }
        Surface::Sphere(b) => {
            if let Some(iv) = line_ball_interval(line, b) {
                for s in [iv.lo, iv.hi] {
                    if window.contains(s, tol) && out.hits.last().is_none_or(|&x| s - x > 1e-12) {
                        out.hits.push(s.clamp(window.lo, window.hi));
                    }
                }
            }
        }
        Surface::UnionBoundary(balls) => {
            let mut hs = Vec::new();
            for (i, b) in balls.iter().enumerate() {
                if let Some(iv) = line_ball_interval(line, b) {
                    for s in [iv.lo, iv.hi] {
                        if !window.contains(s, tol) {
                            continue;
                        }
                        let p = line.point(s);
                        let buried = balls.iter().enumerate().any(|(j, o)| j != i && o.contains_strictly(&p, 1e-12));
                        if !buried {
                            hs.push(s.clamp(window.lo, window.hi));
                        }
                    }
                }
            }
            hs.sort_by(f64::total_cmp);
            hs.dedup_by(|a, b| (*a - *b).abs() <= 1e-10);
            out.hits = hs;
        }
        Surface::Graph(_) => {
            let f = |s: f64| surface.implicit(&line.point(s)).unwrap_or(f64::NAN);
            let grid = scan_grid(window, opts.step_fraction * ball.radius);
            let vals: Vec<f64> = grid.iter().map(|&s| f(s)).collect();
            if vals.iter().all(|v| v.abs() <= 1e-12) {
                out.embedded = true;
                return out;
            }
            for i in 0..grid.len() {
                if vals[i] == 0.0 {
                    out.hits.push(grid[i]);
                } else if i + 1 < grid.len() && vals[i + 1] != 0.0 && (vals[i] < 0.0) != (vals[i + 1] < 0.0) {
                    out.hits.push(bisect(f, grid[i], grid[i + 1], opts.bisection_tol));
                }
            }
        }
        Surface::Cloud(c) => {
            let tube = c.tube_radius;
            let nu = line.nu.as_slice();
            let mut hs: Vec<f64> = Vec::new();
            for q in &c.points {
                // Horizontal Euclidean distance to the projected line bounds the Korányi distance below.
                let d: Vec<f64> = q.v.iter().zip(&line.base.v).map(|(a, b)| a - b).collect();
                let along = dot(&d, nu);
                if norm2(&d) - along * along > tube * tube {
                    continue;
                }
                let (dist, s) = line.distance_to(q);
                if dist <= tube && window.contains(s, tol) {
                    hs.push(s.clamp(window.lo, window.hi));
                }
            }
            hs.sort_by(f64::total_cmp);
            out.hits = cluster(&hs, tube);
        }
    }
    out
}

/// Merges sorted values closer than `gap` and returns the cluster means.
fn cluster(sorted: &[f64], gap: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] - sorted[j - 1] <= gap {
            j += 1;
        }
        out.push(sorted[i..j].iter().sum::<f64>() / (j - i) as f64);
        i = j;
    }
    out
}

/// A Monte Carlo value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Estimate {
    /// Mean of per-sample contributions, with standard error `sd/√n`.
    /// Sums run sequentially in index order.
    pub fn from_contributions(xs: &[f64], seed: u64) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate { value: 0.0, std_error: 0.0, n_samples: 0, seed };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Estimate { value: mean, std_error: (var / n as f64).sqrt(), n_samples: n, seed }
    }

    /// A value without sampling error.
    pub fn exact(value: f64, n_samples: usize, seed: u64) -> Self {
        Estimate { value, std_error: 0.0, n_samples, seed }
    }

    pub fn scale(&self, c: f64) -> Self {
        Estimate { value: self.value * c, std_error: self.std_error * c.abs(), ..*self }
    }

    /// |a − b| measured in combined standard errors.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        let s = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        let d = (self.value - other.value).abs();
        if s == 0.0 {
            if d == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            d / s
        }
    }
}

/// Box in W_ν coordinates containing `π_{W_ν}(B(c, r))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WBox {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
}

impl WBox {
    /// The sampling superset: half-width `r` across ν^⊥ and
    /// `r²/4 + (|v_c| + r)r` in t.
    pub fn sampling(frame: &WFrame, ball: &Ball) -> Self {
        let r = ball.radius;
        let center = frame.coords(&vertical_project(&frame.nu, &ball.center));
        let mut hw = vec![r; frame.dim() - 1];
        hw.push(0.25 * r * r + (ball.center.horizontal_norm() + r) * r);
        WBox { center, half_widths: hw }
    }

    /// A tighter box: t half-width `r²/2 + |v_c| r`.
    pub fn tight(frame: &WFrame, ball: &Ball) -> Self {
        let mut b = Self::sampling(frame, ball);
        let r = ball.radius;
        let last = b.half_widths.len() - 1;
        b.half_widths[last] = 0.5 * r * r + ball.center.horizontal_norm() * r;
        b
    }

    pub fn volume(&self) -> f64 {
        self.half_widths.iter().map(|h| 2.0 * h).product()
    }
}

/// A line drawn by [`sample_lines`] together with its window on the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledLine {
    pub line: HorizontalLine,
    /// `None` when the line misses the ball.
    pub window: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedLineSample {
    pub ball: Ball,
    pub lines: Vec<SampledLine>,
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl WeightedLineSample {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Estimates `∫ f d𝔥` for `f` supported on lines meeting the ball; `f`
    /// is only evaluated on lines that hit.
    pub fn integrate<F>(&self, f: F) -> Estimate
    where
        F: Fn(&SampledLine) -> f64 + Sync + Send,
    {
        let n = self.lines.len() as f64;
        let vals = par::map_range(self.lines.len(), |i| {
            let l = &self.lines[i];
            if l.window.is_some() { n * self.weights[i] * f(l) } else { 0.0 }
        });
        Estimate::from_contributions(&vals, self.seed)
    }

    /// `𝔥(ℒ(B))`, the measure of the set of lines meeting the ball.
    pub fn measure_of_hitting(&self) -> Estimate {
        self.integrate(|_| 1.0)
    }

    pub fn hit_count(&self) -> usize {
        self.lines.iter().filter(|l| l.window.is_some()).count()
    }
}

/// Draws `n` lines with ν uniform on 𝕊^{2k−1} and base uniform in the
/// sampling box of `π_{W_ν}(B)`. Line `i` depends only on `(seed, i)`.
pub fn sample_lines(ball: &Ball, n: usize, seed: u64) -> Result<WeightedLineSample> {
    if n == 0 {
        return Err(invalid("line sample size must be at least 1"));
    }
    let k = ball.k();
    let sphere = crate::group::GroupDim::new(k)?.sphere_area();
    let drawn = par::map_range(n, |i| {
        let mut r = rng::stream(seed, Domain::Lines, i as u64);
        let nu = Direction::new(&rng::unit_vector(&mut r, 2 * k)).expect("unit vector");
        let frame = WFrame::new(&nu);
        let bx = WBox::sampling(&frame, ball);
        let coords: Vec<f64> =
            bx.center.iter().zip(&bx.half_widths).map(|(c, h)| rng::uniform(&mut r, c - h, c + h)).collect();
        let line = HorizontalLine { base: frame.point(&coords), nu: nu.canonical().0 };
        let window = line_ball_interval(&line, ball);
        (SampledLine { line, window }, bx.volume() * sphere / n as f64)
    });
    let (lines, weights) = drawn.into_iter().unzip();
    Ok(WeightedLineSample { ball: ball.clone(), lines, weights, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> Direction {
        Direction::axis(1, 0)
    }

    #[test]
    fn line_point_examples() {
        let l = HorizontalLine::through(&Point::origin(1), &e1());
        assert_eq!(l.point(2.0), Point::new(&[2.0, 0.0], 0.0));
        let l = HorizontalLine::through(&Point::new(&[0.3, 1.0], -0.2), &Direction::normalized(&[1.0, 2.0]).unwrap());
        assert!((l.point(1.0).dist(&l.point(4.0)) - 3.0).abs() < 1e-12);
        assert_eq!(l.point(0.0), l.base);
    }

    #[test]
    fn ball_interval_examples() {
        let unit = Ball::unit(1);
        let iv = line_ball_interval(&HorizontalLine::through(&Point::origin(1), &e1()), &unit).unwrap();
        assert!((iv.lo + 1.0).abs() < 1e-12 && (iv.hi - 1.0).abs() < 1e-12);
        let far = HorizontalLine::through(&Point::new(&[0.0, 3.0], 0.0), &e1());
        assert!(line_ball_interval(&far, &unit).is_none());
        let tangent = HorizontalLine::new(Point::new(&[0.0, 1.0], 0.0), e1()).unwrap();
        let iv = line_ball_interval(&tangent, &unit).unwrap();
        assert!(iv.lo.abs() < 1e-10 && iv.hi.abs() < 1e-10);
    }

    #[test]
    fn ball_interval_endpoints_are_on_sphere() {
        let b = Ball::new(Point::new(&[0.3, -0.2], 0.1), 0.9).unwrap();
        for i in 0..40 {
            let th = i as f64 * 0.37;
            let nu = Direction::normalized(&[th.cos(), th.sin()]).unwrap();
            let l = HorizontalLine::through(&Point::new(&[0.2 * th.sin(), 0.1], 0.3 * (2.0 * th).cos()), &nu);
            if let Some(iv) = line_ball_interval(&l, &b) {
                for s in [iv.lo, iv.hi] {
                    assert!((l.point(s).dist(&b.center) - b.radius).abs() < 1e-9);
                }
                assert!(b.contains(&l.point(0.5 * (iv.lo + iv.hi))));
            }
        }
    }

    #[test]
    fn canonical_flip_reverses_parameter() {
        let p = Point::new(&[0.4, 0.1], 0.3);
        let l = HorizontalLine::through(&p, &Direction::normalized(&[-1.0, 0.5]).unwrap());
        assert!(l.nu.is_canonical());
        let s = l.parameter_of(&p);
        assert!(l.point(s).dist(&p) < 1e-12);
    }

    #[test]
    fn trace_of_smaller_ball() {
        let l = HorizontalLine::through(&Point::origin(1), &e1());
        let a = Region::Ball { ball: Ball::new(Point::origin(1), 0.5).unwrap() };
        let (w, segs) = region_trace(&l, &Ball::unit(1), &a, &TraceOptions::default());
        assert!(w.is_some());
        assert_eq!(segs.intervals.len(), 1);
        assert!((segs.intervals[0].lo + 0.5).abs() < 1e-8 && (segs.intervals[0].hi - 0.5).abs() < 1e-8);
    }

    #[test]
    fn sphere_hits() {
        let s = Surface::Sphere(Ball::unit(1));
        let big = Ball::new(Point::origin(1), 2.0).unwrap();
        let h = surface_hits(&HorizontalLine::through(&Point::origin(1), &e1()), &big, &s, &TraceOptions::default());
        assert_eq!(h.hits.len(), 2);
        assert!((h.hits[0] + 1.0).abs() < 1e-10 && (h.hits[1] - 1.0).abs() < 1e-10);
        let t = HorizontalLine::new(Point::new(&[0.0, 1.0], 0.0), e1()).unwrap();
        let h = surface_hits(&t, &big, &s, &TraceOptions::default());
        assert_eq!(h.hits.len(), 1);
        assert!(h.hits[0].abs() < 1e-10);
    }

    #[test]
    fn distance_to_line_matches_scan() {
        let l = HorizontalLine::through(&Point::new(&[0.1, 0.7], -0.4), &Direction::normalized(&[0.6, 0.8]).unwrap());
        let q = Point::new(&[1.0, -0.3], 0.25);
        let (d, s) = l.distance_to(&q);
        let scan = (0..200_001).map(|i| l.point(-10.0 + 1e-4 * i as f64).dist(&q)).fold(f64::INFINITY, f64::min);
        assert!(d <= scan + 1e-12 && scan - d < 1e-6);
        assert!((l.point(s).dist(&q) - d).abs() < 1e-12);
    }

    #[test]
    fn line_samples_are_reproducible() {
        let a = sample_lines(&Ball::unit(1), 100, 3).unwrap();
        let b = par::sequential(|| sample_lines(&Ball::unit(1), 100, 3).unwrap());
        assert_eq!(a, b);
        assert!(a.weights.iter().all(|w| *w > 0.0));
        assert!(sample_lines(&Ball::unit(1), 0, 3).is_err());
    }
}

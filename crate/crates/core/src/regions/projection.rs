//! Haar measure of vertical projections `π_{W_ν}(X ∩ B)`.
//!
//! W_ν is measured in the coordinates of [`WFrame`]: Lebesgue measure there is
//! the Haar measure. The grid uses cells of side δ in the 2k−1 horizontal
//! directions and δ² in t, aligned to the origin of the coordinates.
//!
//! Analytic surfaces use the fibre test: a cell counts when the horizontal
//! line through its center in direction ν meets `X ∩ B`, since
//! `π_{W_ν}^{-1}(w) = w·L_ν`. Clouds count the cells occupied by the
//! projected points.

use std::collections::HashSet;

use crate::error::{invalid, Result};
use crate::frames::{vertical_project, Direction, WFrame};
use crate::group::{Ball, GroupDim};
use crate::lines::{line_ball_interval, surface_hits, Estimate, HorizontalLine, TraceOptions, WBox};
use crate::par;
use crate::regions::surface::Surface;
use crate::rng::{self, Domain};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionOptions {
    pub trace: TraceOptions,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions { trace: TraceOptions::default() }
    }
}

struct Grid {
    sizes: Vec<f64>,
    lo: Vec<i64>,
    counts: Vec<usize>,
}

impl Grid {
    fn new(bx: &WBox, delta: f64) -> Self {
        let d = bx.center.len();
        let sizes: Vec<f64> = (0..d).map(|i| if i + 1 == d { delta * delta } else { delta }).collect();
        let mut lo = Vec::with_capacity(d);
        let mut counts = Vec::with_capacity(d);
        for i in 0..d {
            let a = ((bx.center[i] - bx.half_widths[i]) / sizes[i]).floor() as i64;
            let b = ((bx.center[i] + bx.half_widths[i]) / sizes[i]).floor() as i64;
            lo.push(a);
            counts.push((b - a + 1) as usize);
        }
        Grid { sizes, lo, counts }
    }

    fn cell_volume(&self) -> f64 {
        self.sizes.iter().product()
    }

    /// Center of the cell with multi-index `idx` (relative to `lo`).
    fn center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(i, &j)| (self.lo[i] + j as i64) as f64 * self.sizes[i] + 0.5 * self.sizes[i]).collect()
    }

    fn columns(&self) -> usize {
        self.counts[..self.counts.len() - 1].iter().product()
    }

    fn column_index(&self, mut c: usize) -> Vec<usize> {
        let d = self.counts.len() - 1;
        let mut idx = vec![0; d + 1];
        for i in 0..d {
            idx[i] = c % self.counts[i];
            c /= self.counts[i];
        }
        idx
    }
}

/// Estimates `H^{2k+1}(π_{W_ν}(X ∩ B))` with grid scale `delta`.
pub fn projection_measure(
    x: &Surface,
    ball: &Ball,
    nu: &Direction,
    delta: f64,
    opts: &ProjectionOptions,
) -> Result<Estimate> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("grid scale must be positive, got {delta}")));
    }
    let frame = WFrame::new(nu);
    let bx = WBox::tight(&frame, ball);
    let grid = Grid::new(&bx, delta);
    let total: usize = match x {
        Surface::Cloud(c) => {
            let cells: HashSet<Vec<i64>> = c
                .indices_in(ball)
                .into_iter()
                .map(|i| {
                    let coords = frame.coords(&vertical_project(nu, &c.points[i]));
                    coords.iter().zip(&grid.sizes).map(|(x, s)| (x / s).floor() as i64).collect()
                })
                .collect();
            cells.len()
        }
        Surface::Sphere(sb) if ball.center.dist(&sb.center) + sb.radius <= ball.radius => {
            let n_t = grid.counts[grid.counts.len() - 1];
            let per_column = par::map_range(grid.columns(), |c| sphere_column(&grid, &frame, nu, sb, grid.column_index(c), n_t));
            per_column.into_iter().sum()
        }
        Surface::Hyperplane(pl) => {
            let n_t = grid.counts[grid.counts.len() - 1];
            let per_column =
                par::map_range(grid.columns(), |c| plane_column(&grid, &frame, nu, pl, ball, grid.column_index(c), n_t, &opts.trace));
            per_column.into_iter().sum()
        }
        _ => {
            let n_t = grid.counts[grid.counts.len() - 1];
            let per_column = par::map_range(grid.columns(), |c| {
                let mut idx = grid.column_index(c);
                let mut count = 0usize;
                for j in 0..n_t {
                    *idx.last_mut().expect("nonempty index") = j;
                    let line = HorizontalLine::through(&frame.point(&grid.center(&idx)), nu);
                    if fibre_meets(&line, ball, x, &opts.trace) {
                        count += 1;
                    }
                }
                count
            });
            per_column.into_iter().sum()
        }
    };
    Ok(Estimate::exact(total as f64 * grid.cell_volume(), grid.columns() * grid.counts[grid.counts.len() - 1], 0))
}

/// Number of cells in one column whose t-center satisfies `g(t) ≤ level`,
/// for a convex `g`: the admissible set is an interval, found by a ternary
/// search for the minimum and two bisections.
fn convex_column(grid: &Grid, n_t: usize, g: impl Fn(f64) -> f64, level: f64) -> usize {
    let last = grid.sizes.len() - 1;
    let h = grid.sizes[last];
    let t0 = grid.lo[last] as f64 * h;
    let t1 = t0 + n_t as f64 * h;
    let scale = 1.0 + t1.abs().max(t0.abs());
    let (mut a, mut b) = (t0, t1);
    for _ in 0..200 {
        if b - a <= 1e-14 * scale {
            break;
        }
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if g(m1) <= g(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let tmin = 0.5 * (a + b);
    if g(tmin) > level {
        return 0;
    }
    let tol = 1e-13 * scale;
    let lo = if g(t0) <= level { t0 } else { crate::optimize::bisect(|t| g(t) - level, t0, tmin, tol) };
    let hi = if g(t1) <= level { t1 } else { crate::optimize::bisect(|t| g(t) - level, tmin, t1, tol) };
    // Cell j has center t0 + (j + ½)h.
    let first = ((lo - t0) / h - 0.5).ceil().max(0.0) as usize;
    let end = (((hi - t0) / h - 0.5).floor() + 1.0).clamp(0.0, n_t as f64) as usize;
    end.saturating_sub(first)
}

/// Column count for a sphere inside the ball. The Korányi distance from the
/// sphere's center to the fibre through `(u, t)` is convex in `t`, being a
/// partial minimum of a jointly convex quartic.
fn sphere_column(grid: &Grid, frame: &WFrame, nu: &Direction, sb: &Ball, idx: Vec<usize>, n_t: usize) -> usize {
    let last = idx.len() - 1;
    let base = grid.center(&idx);
    let dist4 = |t: f64| {
        let mut coords = base.clone();
        coords[last] = t;
        let d = HorizontalLine::through(&frame.point(&coords), nu).distance_to(&sb.center).0;
        d * d * d * d
    };
    convex_column(grid, n_t, dist4, sb.radius.powi(4))
}

/// Column count for a hyperplane. The crossing of the fibre through `(u, t)`
/// with the plane moves affinely with `t`, and Korányi balls are convex in
/// the Euclidean sense, so the admissible `t` form an interval.
fn plane_column(
    grid: &Grid,
    frame: &WFrame,
    nu: &Direction,
    plane: &crate::regions::hyperplane::Hyperplane,
    ball: &Ball,
    idx: Vec<usize>,
    n_t: usize,
    trace: &TraceOptions,
) -> usize {
    let last = idx.len() - 1;
    let base = grid.center(&idx);
    let line_at = |t: f64| {
        let mut coords = base.clone();
        coords[last] = t;
        HorizontalLine::through(&frame.point(&coords), nu)
    };
    let probe = line_at(0.0);
    let dir = probe.nu.as_slice();
    let f1 = crate::group::dot(plane.normal_v(), dir) + plane.normal_t() * 0.5 * crate::group::omega(&probe.base.v, dir);
    if f1.abs() <= 1e-13 * (1.0 + probe.base.knorm()) {
        // Fibres parallel to the plane: fall back to testing each cell.
        let mut idx = idx;
        return (0..n_t)
            .filter(|&j| {
                idx[last] = j;
                fibre_meets(&HorizontalLine::through(&frame.point(&grid.center(&idx)), nu), ball, &Surface::Hyperplane(plane.clone()), trace)
            })
            .count();
    }
    let c_inv = ball.center.inv();
    let g = |t: f64| {
        let line = line_at(t);
        let x = line.point(-plane.eval(&line.base) / f1);
        (&c_inv * &x).knorm().powi(4)
    };
    convex_column(grid, n_t, g, ball.radius.powi(4))
}

fn fibre_meets(line: &HorizontalLine, ball: &Ball, x: &Surface, trace: &TraceOptions) -> bool {
    if let Surface::Hyperplane(p) = x {
        // Fast path: one affine root, then a membership test.
        let nu = line.nu.as_slice();
        let f0 = p.eval(&line.base);
        let f1 = crate::group::dot(p.normal_v(), nu) + p.normal_t() * 0.5 * crate::group::omega(&line.base.v, nu);
        if f1.abs() <= 1e-13 * (1.0 + line.base.knorm()) {
            return f0.abs() <= 1e-12 * (1.0 + line.base.knorm()) && line_ball_interval(line, ball).is_some();
        }
        return ball.contains(&line.point(-f0 / f1));
    }
    if let Surface::Sphere(b) = x {
        // The line meets a Korányi ball in one interval whose endpoints are
        // the only sphere crossings.
        return line_ball_interval(line, b)
            .is_some_and(|iv| ball.contains(&line.point(iv.lo)) || ball.contains(&line.point(iv.hi)));
    }
    let h = surface_hits(line, ball, x, trace);
    !h.hits.is_empty() || (h.embedded && h.window.is_some())
}

/// `|𝕊^{2k−1}| · mean_ν H(π_{W_ν}(S ∩ B))` over `n_dirs` random directions.
pub fn favard_average(
    s: &Surface,
    ball: &Ball,
    n_dirs: usize,
    delta: f64,
    seed: u64,
    opts: &ProjectionOptions,
) -> Result<Estimate> {
    if n_dirs == 0 {
        return Err(invalid("need at least one direction"));
    }
    let k = ball.k();
    let area = GroupDim::new(k)?.sphere_area();
    let vals = par::map_range(n_dirs, |i| {
        let mut r = rng::stream(seed, Domain::Directions, i as u64);
        let nu = Direction::new(&rng::unit_vector(&mut r, 2 * k)).expect("unit vector");
        projection_measure(s, ball, &nu, delta, opts).map(|e| e.value * area)
    });
    let vals: Result<Vec<f64>> = vals.into_iter().collect();
    Ok(Estimate::from_contributions(&vals?, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Point;
    use crate::regions::hyperplane::Hyperplane;

    #[test]
    fn projecting_along_the_line_itself_gives_nothing() {
        // L_ν ∩ B as a cloud collapses to a single cell.
        let nu = Direction::axis(1, 0);
        let pts: Vec<Point> = (0..101).map(|i| Point::new(&[-1.0 + 0.02 * i as f64, 0.0], 0.0)).collect();
        let n = pts.len();
        let c = crate::regions::Cloud::new(pts, vec![1.0; n], Some(0.05)).unwrap();
        let m = projection_measure(&Surface::Cloud(c), &Ball::unit(1), &nu, 0.05, &Default::default()).unwrap();
        assert!(m.value <= 0.05f64.powi(3) * 1.0001);
    }

    #[test]
    fn vertical_subgroup_area_coarse() {
        let nu = Direction::axis(1, 0);
        let w = Surface::Hyperplane(Hyperplane::vertical(&nu, 0.0));
        let m = projection_measure(&w, &Ball::unit(1), &nu, 1.0 / 32.0, &Default::default()).unwrap();
        assert!((m.value - 0.874019).abs() < 0.05, "{}", m.value);
        assert!(projection_measure(&w, &Ball::unit(1), &nu, 0.0, &Default::default()).is_err());
    }

    #[test]
    fn sphere_column_counts_match_the_cell_scan() {
        let sb = Ball::new(Point::new(&[0.1, -0.2], 0.05), 0.6).unwrap();
        let sphere = Surface::Sphere(sb.clone());
        let big = Ball::new(Point::new(&[0.1, -0.2], 0.05), 1.0).unwrap();
        let nu = Direction::normalized(&[0.6, 0.8]).unwrap();
        let fast = projection_measure(&sphere, &big, &nu, 1.0 / 32.0, &Default::default()).unwrap();
        // Reference: scan every cell with the generic fibre test.
        let frame = WFrame::new(&nu);
        let grid = Grid::new(&WBox::tight(&frame, &big), 1.0 / 32.0);
        let n_t = grid.counts[1];
        let mut count = 0usize;
        for c in 0..grid.columns() {
            let mut idx = grid.column_index(c);
            for j in 0..n_t {
                idx[1] = j;
                let line = HorizontalLine::through(&frame.point(&grid.center(&idx)), &nu);
                if line_ball_interval(&line, &sb).is_some() {
                    count += 1;
                }
            }
        }
        assert_eq!(fast.value, count as f64 * grid.cell_volume());
    }

    #[test]
    fn plane_column_counts_match_the_cell_scan() {
        let plane = Hyperplane::new(&[0.3, -0.5, 0.8], 0.1).unwrap();
        let ball = Ball::new(Point::new(&[0.2, 0.1], -0.1), 0.9).unwrap();
        for nu in [Direction::normalized(&[-0.6, 0.8]).unwrap(), Direction::axis(1, 1)] {
            let fast = projection_measure(&Surface::Hyperplane(plane.clone()), &ball, &nu, 1.0 / 32.0, &Default::default()).unwrap();
            let frame = WFrame::new(&nu);
            let grid = Grid::new(&WBox::tight(&frame, &ball), 1.0 / 32.0);
            let mut count = 0usize;
            for c in 0..grid.columns() {
                let mut idx = grid.column_index(c);
                for j in 0..grid.counts[1] {
                    idx[1] = j;
                    let line = HorizontalLine::through(&frame.point(&grid.center(&idx)), &nu);
                    if fibre_meets(&line, &ball, &Surface::Hyperplane(plane.clone()), &TraceOptions::default()) {
                        count += 1;
                    }
                }
            }
            assert_eq!(fast.value, count as f64 * grid.cell_volume());
        }
    }
}

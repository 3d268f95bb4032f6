//! Bilateral and one-sided β-numbers by minimax hyperplane fitting.
//!
//! All work happens in the normalised frame `q ↦ δ_{1/s}(p⁻¹q)`, where the
//! ball `B(p, s)` becomes `B(0, 1)` and distances divide by `s`, so the
//! β-number is the plain two-sided sup-distance there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Ball, Point};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::par;
use crate::regions::{surface_sample, Cloud, Hyperplane, SampleOptions, Surface};
use crate::rng::{self, Domain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaMode {
    BilateralArbitrary,
    BilateralVertical,
    OnesidedVertical,
}

impl BetaMode {
    pub const ALL: [BetaMode; 3] = [BetaMode::BilateralArbitrary, BetaMode::BilateralVertical, BetaMode::OnesidedVertical];

    pub fn vertical(self) -> bool {
        self != BetaMode::BilateralArbitrary
    }

    pub fn bilateral(self) -> bool {
        self != BetaMode::OnesidedVertical
    }

    pub fn name(self) -> &'static str {
        match self {
            BetaMode::BilateralArbitrary => "bilateral-arbitrary",
            BetaMode::BilateralVertical => "bilateral-vertical",
            BetaMode::OnesidedVertical => "onesided-vertical",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaOptions {
    pub coarse_normals: usize,
    pub offsets: usize,
    /// Grid resolution `1/div` (in units of `s`) for the final sup over `P ∩ B`.
    pub grid_div: usize,
    /// Coarser grid used while searching.
    pub search_grid_div: usize,
    /// Cap on grid points over `P ∩ B` (matters for k ≥ 2).
    pub grid_budget: usize,
    /// Samples of `X ∩ B` for analytic surfaces.
    pub inner_points: usize,
    /// Samples of `X ∩ 3B` used as the distance proxy for analytic surfaces.
    pub outer_points: usize,
    pub coarse_points: usize,
    pub top_candidates: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for BetaOptions {
    fn default() -> Self {
        BetaOptions {
            coarse_normals: 512,
            offsets: 17,
            grid_div: 64,
            search_grid_div: 16,
            grid_budget: 20_000,
            inner_points: 400,
            outer_points: 1500,
            coarse_points: 128,
            top_candidates: 8,
            max_iter: 400,
            rel_tol: 1e-4,
            restarts: 1,
            seed: 0,
        }
    }
}

impl BetaOptions {
    /// A cheaper profile for sweeps over many cubes.
    pub fn light() -> Self {
        BetaOptions {
            coarse_normals: 128,
            offsets: 9,
            grid_div: 24,
            search_grid_div: 10,
            grid_budget: 4_000,
            inner_points: 150,
            outer_points: 500,
            coarse_points: 64,
            top_candidates: 4,
            max_iter: 200,
            rel_tol: 1e-3,
            restarts: 1,
            seed: 0,
        }
    }

    /// Doubles every search budget.
    pub fn doubled(&self) -> Self {
        BetaOptions {
            coarse_normals: 2 * self.coarse_normals,
            offsets: 2 * self.offsets - 1,
            top_candidates: 2 * self.top_candidates,
            max_iter: 2 * self.max_iter,
            restarts: 2 * self.restarts + 1,
            ..*self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaResult {
    pub value: f64,
    /// Minimising hyperplane in original coordinates.
    pub plane: Hyperplane,
    pub mode: BetaMode,
    pub iterations: usize,
    pub restarts: usize,
}

/// The surface as seen from the normalised frame.
enum Target {
    Plane(Hyperplane),
    /// Sampled surface. `tangents[i]` is the tangent hyperplane at
    /// `near.points[i]` when the surface has a normal there.
    Sampled { inner: Vec<Point>, near: Cloud, tangents: Vec<Option<Hyperplane>>, sphere: Option<Ball> },
}

struct Frame {
    p: Point,
    p_inv: Point,
    s: f64,
}

impl Frame {
    fn to_local(&self, q: &Point) -> Point {
        (&self.p_inv * q).dilate(1.0 / self.s)
    }
}

fn build_target(x: &Surface, frame: &Frame, opts: &BetaOptions) -> Result<Target> {
    let ball = Ball { center: frame.p.clone(), radius: frame.s };
    let local = |pts: &[Point]| -> Vec<Point> { pts.iter().map(|q| frame.to_local(q)).collect() };
    match x {
        Surface::Hyperplane(pl) => Ok(Target::Plane(pl.left_translate(&frame.p_inv).dilate(1.0 / frame.s))),
        Surface::Cloud(c) => {
            let inner = local(&c.subset(&c.indices_in(&ball)).points);
            if inner.is_empty() {
                return Err(Error::Empty("cloud has no points in the ball".into()));
            }
            let big = Ball { center: frame.p.clone(), radius: 3.0 * frame.s };
            let near_pts = local(&c.subset(&c.indices_in(&big)).points);
            let n = near_pts.len();
            Ok(Target::Sampled { inner, near: Cloud::new(near_pts, vec![1.0; n], Some(1.0))?, tangents: vec![None; n], sphere: None })
        }
        _ => {
            let so = SampleOptions { tube_radius: Some(1.0), ..Default::default() };
            let inner = surface_sample(x, &ball, opts.inner_points, opts.seed, &so)?;
            let big = Ball { center: frame.p.clone(), radius: 3.0 * frame.s };
            let outer = surface_sample(x, &big, opts.outer_points, opts.seed ^ 0x5eed, &so)?;
            let originals: Vec<Point> = outer.points.iter().chain(&inner.points).cloned().collect();
            let near_pts = local(&originals);
            let inner_pts = local(&inner.points);
            let n = near_pts.len();
            let tangents = originals
                .iter()
                .map(|y| {
                    let m = x.unit_normal(y)?;
                    let b = crate::group::dot(&m[..m.len() - 1], &y.v) + m[m.len() - 1] * y.t;
                    Some(Hyperplane::new(&m, b).ok()?.left_translate(&frame.p_inv).dilate(1.0 / frame.s))
                })
                .collect();
            let sphere = match x {
                Surface::Sphere(b) => Some(Ball { center: frame.to_local(&b.center), radius: b.radius / frame.s }),
                _ => None,
            };
            Ok(Target::Sampled { inner: inner_pts, near: Cloud::new(near_pts, vec![1.0; n], Some(1.0))?, tangents, sphere })
        }
    }
}

/// Grid on `P ∩ B(0, 1)`: the coordinate with the largest normal component is
/// solved for, the others run over `[−1, 1]` (horizontal) or `[−¼, ¼]` (t).
pub(crate) fn plane_grid(plane: &Hyperplane, div: usize, budget: usize) -> Vec<Point> {
    let n = plane.m.len();
    let drop = (0..n).max_by(|&i, &j| plane.m[i].abs().total_cmp(&plane.m[j].abs())).unwrap_or(0);
    let free: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
    let per_axis = (2 * div + 1).min((budget as f64).powf(1.0 / free.len() as f64).floor().max(3.0) as usize);
    let unit = Ball::unit((n - 1) / 2);
    let total = per_axis.pow(free.len() as u32);
    let mut out = Vec::new();
    let mut x = vec![0.0; n];
    for mut idx in 0..total {
        for &f in &free {
            let j = idx % per_axis;
            idx /= per_axis;
            let u = -1.0 + 2.0 * j as f64 / (per_axis - 1) as f64;
            x[f] = if f == n - 1 { 0.25 * u } else { u };
        }
        let rest: f64 = free.iter().map(|&f| plane.m[f] * x[f]).sum();
        x[drop] = (plane.b - rest) / plane.m[drop];
        let q = Point::new(&x[..n - 1], x[n - 1]);
        if unit.contains(&q) {
            out.push(q);
        }
    }
    out
}

/// Distance from `q` to the sphere `∂ball`, starting from the sphere point
/// `start`. Alternates between the foot of `q` on the tangent plane and its
/// radial projection back to the sphere; the fixed point is a critical point
/// of the distance, and every iterate gives an upper bound.
fn sphere_distance(ball: &Ball, q: &Point, start: &Point) -> f64 {
    let c = &ball.center;
    let c_inv = c.inv();
    let sphere = Surface::Sphere(ball.clone());
    let retract = |x: &Point| -> Option<Point> {
        let y = &c_inv * x;
        let n = y.knorm();
        (n > 0.0).then(|| c * &y.dilate(ball.radius / n))
    };
    let mut y = start.clone();
    let mut best = start.dist(q);
    for _ in 0..50 {
        let Some(m) = sphere.unit_normal(&y) else { break };
        let b = crate::group::dot(&m[..m.len() - 1], &y.v) + m[m.len() - 1] * y.t;
        let Ok(tp) = Hyperplane::new(&m, b) else { break };
        let (_, foot) = tp.distance_with_foot(q);
        let Some(next) = retract(&foot) else { break };
        let d = next.dist(q);
        let moved = next.dist(&y);
        y = next;
        if d < best {
            best = d;
        }
        if moved <= 1e-12 * ball.radius {
            break;
        }
    }
    best
}

impl Target {
    fn inner(&self) -> &[Point] {
        match self {
            Target::Plane(_) => &[],
            Target::Sampled { inner, .. } => inner,
        }
    }

    fn distance_to(&self, g: &Point, exact: bool) -> f64 {
        match self {
            Target::Plane(pl) => pl.distance(g),
            Target::Sampled { near, tangents, sphere, .. } => {
                let Some((d, i)) = near.nearest(g) else { return f64::INFINITY };
                if let (Some(b), true) = (sphere, exact) {
                    return sphere_distance(b, g, &near.points[i]).min(d);
                }
                // Between samples the tangent plane at the nearest sample is a
                // far better proxy than the sample itself, as long as the foot
                // stays close to that sample.
                match &tangents[i] {
                    Some(tp) => {
                        let (dt, foot) = tp.distance_with_foot(g);
                        if foot.dist(&near.points[i]) <= 2.0 * d { dt.min(d) } else { d }
                    }
                    None => d,
                }
            }
        }
    }
}

struct Problem<'a> {
    target: &'a Target,
    inner: Vec<Point>,
    mode: BetaMode,
    k: usize,
    budget: usize,
}

impl Problem<'_> {
    fn plane_from(&self, u: &[f64]) -> Option<Hyperplane> {
        let mut m: Vec<f64> = u[..u.len() - 1].to_vec();
        if self.mode.vertical() {
            m.push(0.0);
        }
        let h = Hyperplane::new(&m, u[u.len() - 1]).ok()?;
        Some(if self.mode.vertical() { Hyperplane { class: crate::regions::PlaneClass::Vertical, ..h } } else { h })
    }

    fn term1(&self, plane: &Hyperplane, pts: &[Point]) -> f64 {
        pts.iter().map(|q| plane.distance(q)).fold(0.0, f64::max)
    }

    fn objective(&self, plane: &Hyperplane, div: usize, exact: bool) -> f64 {
        let mut v = self.term1(plane, &self.inner);
        if self.mode.bilateral() {
            let grid = plane_grid(plane, div, self.budget);
            let t2 = grid.iter().map(|g| self.target.distance_to(g, exact)).fold(0.0, f64::max);
            v += t2;
        }
        v
    }

    fn encode(&self, plane: &Hyperplane) -> Vec<f64> {
        let mut u: Vec<f64> = if self.mode.vertical() { plane.normal_v().to_vec() } else { plane.m.clone() };
        u.push(plane.b);
        u
    }

    fn coarse_normals(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let dim = if self.mode.vertical() { 2 * self.k } else { 2 * self.k + 1 };
        match dim {
            2 => (0..count)
                .map(|i| {
                    let a = std::f64::consts::PI * i as f64 / count as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect(),
            3 => {
                // Fibonacci points on the upper hemisphere (normals are defined up to sign).
                let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                (0..count)
                    .map(|i| {
                        let z = 1.0 - (i as f64 + 0.5) / count as f64;
                        let r = (1.0 - z * z).max(0.0).sqrt();
                        let th = golden * i as f64;
                        vec![r * th.cos(), r * th.sin(), z]
                    })
                    .collect()
            }
            _ => (0..count)
                .map(|i| rng::unit_vector(&mut rng::stream(seed, Domain::Hyperplanes, i as u64), dim))
                .collect(),
        }
    }
}

/// Computes the β-number of `x` at `(p, s)` in the given mode.
pub fn fit_beta(x: &Surface, p: &Point, s: f64, mode: BetaMode, opts: &BetaOptions) -> Result<BetaResult> {
    if !(s > 0.0) {
        return Err(crate::error::invalid(format!("scale must be positive, got {s}")));
    }
    let frame = Frame { p: p.clone(), p_inv: p.inv(), s };
    let target = build_target(x, &frame, opts)?;
    let k = p.k();
    // For a plane target, `X ∩ B` is itself a grid: coarse while searching,
    // fine for the reported value.
    let inner_at = |div: usize| -> Result<Vec<Point>> {
        match &target {
            Target::Plane(pl) => {
                let g = plane_grid(pl, div, opts.grid_budget);
                if g.is_empty() {
                    return Err(Error::Empty("surface misses the ball".into()));
                }
                Ok(g)
            }
            Target::Sampled { .. } => Ok(target.inner().to_vec()),
        }
    };
    let inner = inner_at(opts.search_grid_div.max(8))?;
    let problem = Problem { target: &target, inner, mode, k, budget: opts.grid_budget };

    // Coarse stage: first term on a subsample, over normals × offsets.
    let stride = (problem.inner.len() / opts.coarse_points.max(1)).max(1);
    let sub: Vec<Point> = problem.inner.iter().step_by(stride).cloned().collect();
    let normals = problem.coarse_normals(opts.coarse_normals, opts.seed);
    let scored = par::map_slice(&normals, |nv| {
        let mut m = nv.clone();
        if mode.vertical() {
            m.push(0.0);
        }
        let proj: Vec<f64> = sub.iter().map(|q| crate::group::dot(&m[..2 * k], &q.v) + m[2 * k] * q.t).collect();
        let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut best: Vec<(f64, Hyperplane)> = Vec::new();
        for j in 0..opts.offsets {
            let b = if opts.offsets == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * j as f64 / (opts.offsets - 1) as f64 };
            if let Some(pl) = problem.plane_from(&{
                let mut u = nv.clone();
                u.push(b);
                u
            }) {
                best.push((problem.term1(&pl, &sub), pl));
            }
        }
        best
    });
    let mut cands: Vec<(f64, Hyperplane)> = scored.into_iter().flatten().collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    cands.truncate(opts.top_candidates.max(1));

    // Full objective on the short list, then Nelder–Mead from the best.
    let full = par::map_slice(&cands, |(_, pl)| problem.objective(pl, opts.search_grid_div, false));
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| full[a].total_cmp(&full[b]));
    let mut best_u = problem.encode(&cands[order[0]].1);
    let mut best_v = full[order[0]];
    let nm_opts = NelderMeadOptions { initial_step: 0.05, rel_tol: opts.rel_tol, abs_floor: 1e-6, max_iter: opts.max_iter };
    let mut iterations = 0;
    let mut restarts = 0;
    for round in 0..=opts.restarts {
        let start = if round == 0 || order.len() <= round { best_u.clone() } else { problem.encode(&cands[order[round]].1) };
        let m = nelder_mead(
            |u| problem.plane_from(u).map_or(f64::INFINITY, |pl| problem.objective(&pl, opts.search_grid_div, false)),
            &start,
            &nm_opts,
        );
        iterations += m.iterations;
        if round > 0 {
            restarts += 1;
        }
        if m.value < best_v {
            best_v = m.value;
            best_u = m.x;
        }
    }
    let plane_local = problem.plane_from(&best_u).ok_or_else(|| Error::Undefined("degenerate plane".into()))?;
    let problem = Problem { inner: inner_at(opts.grid_div)?, ..problem };
    let value = problem.objective(&plane_local, opts.grid_div, true);
    let plane = plane_local.dilate(s).left_translate(p);
    let plane = if mode.vertical() {
        let mut pl = plane;
        let last = pl.m.len() - 1;
        pl.m[last] = 0.0;
        pl.class = crate::regions::PlaneClass::Vertical;
        pl
    } else {
        plane
    };
    Ok(BetaResult { value, plane, mode, iterations, restarts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Direction;

    #[test]
    fn plane_grid_lies_on_plane_and_in_ball() {
        let pl = Hyperplane::new(&[0.3, 0.2, 0.9], 0.05).unwrap();
        let g = plane_grid(&pl, 16, 20_000);
        assert!(!g.is_empty());
        for q in &g {
            assert!(pl.eval(q).abs() < 1e-12);
            assert!(Ball::unit(1).contains(q));
        }
    }

    #[test]
    fn a_plane_fits_itself() {
        let opts = BetaOptions::light();
        let v = Surface::Hyperplane(Hyperplane::vertical(&Direction::normalized(&[1.0, 1.0]).unwrap(), 0.2));
        let a = 0.2 / 2f64.sqrt();
        let p = Point::new(&[a, a], 0.3);
        let r = fit_beta(&v, &p, 0.5, BetaMode::BilateralVertical, &opts).unwrap();
        assert!(r.value <= 1e-3, "{}", r.value);
    }
}

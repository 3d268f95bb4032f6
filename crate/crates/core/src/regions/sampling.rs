//! Random points on surfaces weighted by horizontal perimeter.
//!
//! Each analytic surface is parametrised over a box `U ⊂ ℝ^{2k}`. For a
//! uniform `u ∈ U` the point `x(u)` carries the weight
//! `vol(U) · |C(x) N(u)| / N_tried`, where `N(u)` is the cofactor normal of
//! the Jacobian (its length is the Euclidean area element and its direction
//! the unit normal). Summing the weights of the accepted points inside the
//! ball therefore estimates the horizontal perimeter of `S ∩ B`.

use crate::error::{Error, Result};
use crate::frames::{Direction, WFrame};
use crate::group::{Ball, Point};
use crate::lines::WBox;
use crate::par;
use crate::regions::cloud::Cloud;
use crate::regions::hyperplane::Hyperplane;
use crate::regions::surface::{perimeter_integrand, IntrinsicGraph, Surface};
use crate::rng::{self, Domain};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    /// Candidate draws allowed per requested point before giving up.
    pub max_tries_per_point: usize,
    /// Tube radius recorded on the output cloud; `None` uses the spacing rule.
    pub tube_radius: Option<f64>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { max_tries_per_point: 2000, tube_radius: None }
    }
}

enum Patch<'a> {
    Plane { plane: &'a Hyperplane, drop: usize },
    Sphere { ball: &'a Ball },
    Graph { graph: &'a IntrinsicGraph },
}

struct Param<'a> {
    patch: Patch<'a>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Param<'_> {
    fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    fn map(&self, u: &[f64]) -> Point {
        match &self.patch {
            Patch::Plane { plane, drop } => {
                let n = plane.m.len();
                let mut x = vec![0.0; n];
                let mut acc = plane.b;
                let mut j = 0;
                for (i, xi) in x.iter_mut().enumerate() {
                    if i != *drop {
                        *xi = u[j];
                        acc -= plane.m[i] * u[j];
                        j += 1;
                    }
                }
                x[*drop] = acc / plane.m[*drop];
                Point::new(&x[..n - 1], x[n - 1])
            }
            Patch::Sphere { ball } => {
                let r = ball.radius;
                let phi = u[0];
                let sigma = hyperspherical(&u[1..]);
                let rho = r * phi.cos().max(0.0).sqrt();
                let w: Vec<f64> = sigma.iter().map(|s| rho * s).collect();
                &ball.center * &Point::new(&w, 0.25 * r * r * phi.sin())
            }
            Patch::Graph { graph } => graph.lift(u),
        }
    }

    /// Cofactor normal of the Jacobian by central differences, kept inside the box.
    fn cofactor_normal(&self, u: &[f64]) -> Vec<f64> {
        let d = u.len();
        let n = d + 1;
        let mut jac = vec![vec![0.0; d]; n];
        for j in 0..d {
            let scale = (self.hi[j] - self.lo[j]).max(1e-12);
            let room = (u[j] - self.lo[j]).min(self.hi[j] - u[j]).max(0.0);
            let h = (1e-6 * scale).min(0.5 * room).max(1e-12 * scale);
            let mut a = u.to_vec();
            let mut b = u.to_vec();
            a[j] += h;
            b[j] -= h;
            let (pa, pb) = (self.map(&a), self.map(&b));
            for i in 0..n {
                let (xa, xb) = if i < d { (pa.v[i], pb.v[i]) } else { (pa.t, pb.t) };
                jac[i][j] = (xa - xb) / (2.0 * h);
            }
        }
        (0..n)
            .map(|skip| {
                let minor: Vec<Vec<f64>> = (0..n).filter(|&i| i != skip).map(|i| jac[i].clone()).collect();
                let sign = if skip % 2 == 0 { 1.0 } else { -1.0 };
                sign * determinant(minor)
            })
            .collect()
    }
}

/// Point of 𝕊^{n−1} from `n − 1` hyperspherical angles.
fn hyperspherical(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut out = vec![0.0; n];
    let mut prod = 1.0;
    for (i, a) in angles.iter().enumerate() {
        out[i] = prod * a.cos();
        prod *= a.sin();
    }
    out[n - 1] = prod;
    out
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap_or(c);
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for cc in c..n {
                a[r][cc] -= f * a[c][cc];
            }
        }
    }
    det
}

fn ball_box(ball: &Ball) -> (Vec<f64>, Vec<f64>) {
    let (hv, ht) = ball.euclidean_half_widths();
    let mut lo: Vec<f64> = ball.center.v.iter().map(|c| c - hv).collect();
    let mut hi: Vec<f64> = ball.center.v.iter().map(|c| c + hv).collect();
    lo.push(ball.center.t - ht);
    hi.push(ball.center.t + ht);
    (lo, hi)
}

fn plane_param<'a>(plane: &'a Hyperplane, ball: &Ball) -> Param<'a> {
    let drop = (0..plane.m.len()).max_by(|&i, &j| plane.m[i].abs().total_cmp(&plane.m[j].abs())).unwrap_or(0);
    let (blo, bhi) = ball_box(ball);
    let lo = blo.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, x)| *x).collect();
    let hi = bhi.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, x)| *x).collect();
    Param { patch: Patch::Plane { plane, drop }, lo, hi }
}

/// Parameter box for the sphere `∂B(sphere)`, shrunk to cover only the part
/// that can meet `target`.
fn sphere_param<'a>(sphere: &'a Ball, target: &Ball) -> Param<'a> {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};
    let n = 2 * sphere.k();
    let r = sphere.radius;
    // Euclidean box of the target in coordinates centred at the sphere.
    let local = target.left_translate(&sphere.center.inv());
    let (lo_box, hi_box) = ball_box(&local);
    let t_lo = lo_box[n];
    let t_hi = hi_box[n];
    let phi = |t: f64| (4.0 * t / (r * r)).clamp(-1.0, 1.0).asin();
    let mut lo = vec![phi(t_lo).max(-FRAC_PI_2)];
    let mut hi = vec![phi(t_hi).min(FRAC_PI_2)];
    for i in 0..n - 1 {
        lo.push(0.0);
        hi.push(if i + 2 == n { TAU } else { PI });
    }
    if n == 2 {
        let straddles = lo_box[0] <= 0.0 && hi_box[0] >= 0.0 && lo_box[1] <= 0.0 && hi_box[1] >= 0.0;
        if !straddles {
            // The box misses the axis, so its directions span less than π.
            let mid = (0.5 * (lo_box[1] + hi_box[1])).atan2(0.5 * (lo_box[0] + hi_box[0]));
            let mut a_lo = 0.0f64;
            let mut a_hi = 0.0f64;
            for x in [lo_box[0], hi_box[0]] {
                for y in [lo_box[1], hi_box[1]] {
                    let d = (y.atan2(x) - mid + PI).rem_euclid(TAU) - PI;
                    a_lo = a_lo.min(d);
                    a_hi = a_hi.max(d);
                }
            }
            lo[1] = mid + a_lo;
            hi[1] = mid + a_hi;
        }
    }
    Param { patch: Patch::Sphere { ball: sphere }, lo, hi }
}

fn graph_param<'a>(graph: &'a IntrinsicGraph, ball: &Ball) -> Param<'a> {
    let bx = WBox::tight(graph.frame(), ball);
    let lo = bx.center.iter().zip(&bx.half_widths).map(|(c, h)| c - h).collect();
    let hi = bx.center.iter().zip(&bx.half_widths).map(|(c, h)| c + h).collect();
    Param { patch: Patch::Graph { graph }, lo, hi }
}

/// Draws candidates in index order until `n` land in `keep`; returns the
/// accepted points with weights and the number of candidates consumed.
fn draw(
    param: &Param,
    n: usize,
    seed: u64,
    stream_offset: u64,
    keep: &(dyn Fn(&Point) -> bool + Sync),
    opts: &SampleOptions,
) -> Result<(Vec<Point>, Vec<f64>, usize)> {
    let max_tries = n.saturating_mul(opts.max_tries_per_point).max(1);
    let mut accepted: Vec<(Point, f64)> = Vec::with_capacity(n);
    let mut next = 0usize;
    let mut tried = 0usize;
    while accepted.len() < n {
        if next >= max_tries {
            return Err(Error::Empty(format!("only {} of {n} surface points found in the ball", accepted.len())));
        }
        let batch = (2 * (n - accepted.len())).max(64).min(max_tries - next);
        let cands = par::map_range(batch, |j| {
            let i = (next + j) as u64;
            let mut r = rng::stream(seed, Domain::Surface, stream_offset + i);
            let u: Vec<f64> = param.lo.iter().zip(&param.hi).map(|(a, b)| rng::uniform(&mut r, *a, *b)).collect();
            let p = param.map(&u);
            if !keep(&p) {
                return None;
            }
            let normal = param.cofactor_normal(&u);
            Some((perimeter_integrand(&p, &normal), p))
        });
        for (j, c) in cands.into_iter().enumerate() {
            if let Some((density, p)) = c {
                accepted.push((p, density));
                if accepted.len() == n {
                    tried = next + j + 1;
                    break;
                }
            }
        }
        next += batch;
    }
    let vol = param.volume();
    let (points, dens): (Vec<Point>, Vec<f64>) = accepted.into_iter().unzip();
    let weights = dens.into_iter().map(|d| vol * d / tried as f64).collect();
    Ok((points, weights, tried))
}

/// `n` points of `S ∩ B` whose weights sum to an estimate of the horizontal
/// perimeter of `S ∩ B`. For clouds this is the subset inside the ball.
pub fn surface_sample(surface: &Surface, ball: &Ball, n: usize, seed: u64, opts: &SampleOptions) -> Result<Cloud> {
    let inside = |p: &Point| ball.contains(p);
    let (points, weights) = match surface {
        Surface::Cloud(c) => return Ok(c.subset(&c.indices_in(ball))),
        Surface::Hyperplane(p) => {
            let (pts, w, _) = draw(&plane_param(p, ball), n, seed, 0, &inside, opts)?;
            (pts, w)
        }
        Surface::Sphere(b) => {
            let (pts, w, _) = draw(&sphere_param(b, ball), n, seed, 0, &inside, opts)?;
            (pts, w)
        }
        Surface::Graph(g) => {
            let (pts, w, _) = draw(&graph_param(g, ball), n, seed, 0, &inside, opts)?;
            (pts, w)
        }
        Surface::UnionBoundary(balls) => {
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            let per = n.div_ceil(balls.len().max(1));
            for (i, b) in balls.iter().enumerate() {
                let keep = |p: &Point| {
                    ball.contains(p) && !balls.iter().enumerate().any(|(j, o)| j != i && o.contains_strictly(p, 1e-12))
                };
                let offset = (i as u64) << 40;
                match draw(&sphere_param(b, ball), per, seed, offset, &keep, opts) {
                    Ok((p, w, _)) => {
                        pts.extend(p);
                        ws.extend(w);
                    }
                    Err(Error::Empty(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            if pts.is_empty() {
                return Err(Error::Empty("boundary of the union misses the ball".into()));
            }
            (pts, ws)
        }
    };
    Cloud::new(points, weights, opts.tube_radius)
}

/// `n` Haar-uniform points of `W_ν ∩ B`, each weighted by its share of the
/// sampling box volume.
pub fn vertical_subgroup_sample(nu: &Direction, ball: &Ball, n: usize, seed: u64) -> Result<Cloud> {
    let frame = WFrame::new(nu);
    let bx = WBox::tight(&frame, ball);
    let lo: Vec<f64> = bx.center.iter().zip(&bx.half_widths).map(|(c, h)| c - h).collect();
    let hi: Vec<f64> = bx.center.iter().zip(&bx.half_widths).map(|(c, h)| c + h).collect();
    let mut pts = Vec::with_capacity(n);
    let mut i = 0u64;
    while pts.len() < n {
        if i as usize > n.saturating_mul(10_000) + 10_000 {
            return Err(Error::Empty("W_ν misses the ball".into()));
        }
        let mut r = rng::stream(seed, Domain::Cloud, i);
        let u: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| rng::uniform(&mut r, *a, *b)).collect();
        let p = frame.point(&u);
        if ball.contains(&p) {
            pts.push(p);
        }
        i += 1;
    }
    let w = bx.volume() / i as f64;
    Cloud::new(pts, vec![w; n], None)
}

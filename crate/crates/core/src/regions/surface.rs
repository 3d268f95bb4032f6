//! Codimension-one sets: analytic (implicit) surfaces and weighted clouds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frames::{vertical_project, Direction, WFrame};
use crate::group::{dot, knorm4_between, omega_left_gradient, Ball, Point};
use crate::regions::cloud::Cloud;
use crate::regions::hyperplane::Hyperplane;

/// `ψ(w) = offset + amp·sin(freq·w₁) + t_amp·sin(t_freq·w_t)` on W_ν, where
/// `w₁` is the first W coordinate and `w_t` the vertical one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub offset: f64,
    pub amp: f64,
    pub freq: f64,
    pub t_amp: f64,
    pub t_freq: f64,
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec { offset: 0.0, amp: 0.2, freq: 2.0, t_amp: 0.1, t_freq: 2.0 }
    }
}

/// The intrinsic graph `{w · (ψ(w)ν, 0) : w ∈ W_ν}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntrinsicGraph {
    pub nu: Direction,
    pub spec: GraphSpec,
    frame: WFrame,
}

impl PartialEq for IntrinsicGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nu == other.nu && self.spec == other.spec
    }
}

impl IntrinsicGraph {
    pub fn new(nu: Direction, spec: GraphSpec) -> Self {
        let frame = WFrame::new(&nu);
        IntrinsicGraph { nu, spec, frame }
    }

    pub fn frame(&self) -> &WFrame {
        &self.frame
    }

    /// ψ evaluated at a point of W_ν.
    pub fn psi(&self, w: &Point) -> f64 {
        let w1 = dot(&w.v, &self.frame.basis[0]);
        let s = &self.spec;
        s.offset + s.amp * (s.freq * w1).sin() + s.t_amp * (s.t_freq * w.t).sin()
    }

    /// The graph point over the W coordinates `coords`.
    pub fn lift(&self, coords: &[f64]) -> Point {
        let w = self.frame.point(coords);
        let l: Vec<f64> = self.nu.as_slice().iter().map(|n| n * self.psi(&w)).collect();
        &w * &Point::new(&l, 0.0)
    }

    pub fn eval(&self, p: &Point) -> f64 {
        dot(&p.v, self.nu.as_slice()) - self.psi(&vertical_project(&self.nu, p))
    }

    /// Lipschitz bound of ψ in each W coordinate direction.
    pub fn slope_bound(&self) -> f64 {
        (self.spec.amp * self.spec.freq).abs() + (self.spec.t_amp * self.spec.t_freq).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Surface {
    Hyperplane(Hyperplane),
    /// The Korányi sphere `∂B(c, r)`.
    Sphere(Ball),
    /// The boundary of a finite union of closed balls.
    UnionBoundary(Vec<Ball>),
    Graph(IntrinsicGraph),
    Cloud(Cloud),
}

/// Names accepted by [`Surface::from_name`].
pub const SURFACE_NAMES: &[&str] =
    &["vertical-hyperplane", "horizontal-plane", "koranyi-sphere", "intrinsic-graph", "half-space", "cloud:<path>"];

impl Surface {
    /// Builds one of the packaged surfaces with its default parameters.
    ///
    /// `half-space` yields the boundary of the tilted half-space used in the
    /// region experiments; `cloud:<path>` loads a CSV cloud.
    pub fn from_name(name: &str, k: usize) -> Result<Surface> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        let e1 = Direction::axis(k, 0);
        Ok(match name {
            "vertical-hyperplane" => Surface::Hyperplane(Hyperplane::vertical(&e1, 0.0)),
            "horizontal-plane" => Surface::Hyperplane(Hyperplane::horizontal_through(&Point::origin(k))),
            "koranyi-sphere" => Surface::Sphere(Ball::unit(k)),
            "intrinsic-graph" => Surface::Graph(IntrinsicGraph::new(e1, GraphSpec::default())),
            "half-space" => Surface::Hyperplane(default_half_space_plane(k)),
            other => match other.strip_prefix("cloud:") {
                Some(path) => Surface::Cloud(Cloud::read_csv(Path::new(path), k)?),
                None => return Err(Error::UnknownSurface(other.to_string())),
            },
        })
    }

    pub fn k(&self) -> usize {
        match self {
            Surface::Hyperplane(p) => p.k(),
            Surface::Sphere(b) => b.k(),
            Surface::UnionBoundary(bs) => bs.first().map_or(1, |b| b.k()),
            Surface::Graph(g) => g.nu.k(),
            Surface::Cloud(c) => c.k(),
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Surface::Hyperplane(p) if p.is_vertical() => "vertical-hyperplane",
            Surface::Hyperplane(_) => "hyperplane",
            Surface::Sphere(_) => "koranyi-sphere",
            Surface::UnionBoundary(_) => "union-of-balls-boundary",
            Surface::Graph(_) => "intrinsic-graph",
            Surface::Cloud(_) => "cloud",
        }
    }

    /// A defining function vanishing exactly on the surface. `None` for clouds.
    pub fn implicit(&self, p: &Point) -> Option<f64> {
        Some(match self {
            Surface::Hyperplane(pl) => pl.eval(p),
            Surface::Sphere(b) => p.dist(&b.center) - b.radius,
            Surface::UnionBoundary(bs) => bs.iter().map(|b| p.dist(&b.center) - b.radius).fold(f64::INFINITY, f64::min),
            Surface::Graph(g) => g.eval(p),
            Surface::Cloud(_) => return None,
        })
    }

    /// Euclidean unit normal at a surface point.
    pub fn unit_normal(&self, p: &Point) -> Option<Vec<f64>> {
        let g = match self {
            Surface::Hyperplane(pl) => return Some(pl.m.clone()),
            Surface::Sphere(b) => sphere_gradient(b, p),
            Surface::UnionBoundary(bs) => {
                let b = bs.iter().min_by(|a, b| {
                    (p.dist(&a.center) - a.radius).abs().total_cmp(&(p.dist(&b.center) - b.radius).abs())
                })?;
                sphere_gradient(b, p)
            }
            Surface::Graph(_) => numeric_gradient(|q| self.implicit(q).unwrap_or(0.0), p),
            Surface::Cloud(_) => return None,
        };
        let len = dot(&g, &g).sqrt();
        if len == 0.0 {
            return None;
        }
        Some(g.iter().map(|x| x / len).collect())
    }

    /// The hyperplane record, for hyperplane surfaces.
    pub fn as_hyperplane(&self) -> Option<&Hyperplane> {
        match self {
            Surface::Hyperplane(p) => Some(p),
            _ => None,
        }
    }

    /// Image under a left translation. Clouds translate pointwise.
    pub fn left_translate(&self, g: &Point) -> Surface {
        match self {
            Surface::Hyperplane(p) => Surface::Hyperplane(p.left_translate(g)),
            Surface::Sphere(b) => Surface::Sphere(b.left_translate(g)),
            Surface::UnionBoundary(bs) => Surface::UnionBoundary(bs.iter().map(|b| b.left_translate(g)).collect()),
            Surface::Graph(_) => self.clone(),
            Surface::Cloud(c) => Surface::Cloud(c.map_points(|p| g * p, 1.0)),
        }
    }

    /// Image under `δ_r`; cloud weights scale as `r^{2k+1}`.
    pub fn dilate(&self, r: f64) -> Surface {
        match self {
            Surface::Hyperplane(p) => Surface::Hyperplane(p.dilate(r)),
            Surface::Sphere(b) => Surface::Sphere(b.dilate(r)),
            Surface::UnionBoundary(bs) => Surface::UnionBoundary(bs.iter().map(|b| b.dilate(r)).collect()),
            Surface::Graph(_) => self.clone(),
            Surface::Cloud(c) => {
                let w = r.powi(2 * c.k() as i32 + 1);
                let mut out = c.map_points(|p| p.dilate(r), w);
                out.tube_radius *= r;
                Surface::Cloud(out)
            }
        }
    }
}

/// The packaged half-space boundary: a plane tilted between vertical and H.
pub fn default_half_space_plane(k: usize) -> Hyperplane {
    let mut m = vec![0.0; 2 * k + 1];
    m[0] = 1.0;
    m[2 * k] = 0.5;
    Hyperplane::new(&m, 0.0).expect("fixed normal")
}

/// Gradient of `‖c⁻¹p‖⁴` with respect to the coordinates of `p`.
fn sphere_gradient(b: &Ball, p: &Point) -> Vec<f64> {
    let c = &b.center;
    let yv: Vec<f64> = p.v.iter().zip(&c.v).map(|(x, y)| x - y).collect();
    let yt = p.t - c.t - 0.5 * crate::group::omega(&c.v, &p.v);
    let r2 = dot(&yv, &yv);
    let a = omega_left_gradient(&c.v);
    let mut g: Vec<f64> = yv.iter().zip(&a).map(|(y, ai)| 4.0 * r2 * y - 16.0 * yt * ai).collect();
    g.push(32.0 * yt);
    g
}

fn numeric_gradient(f: impl Fn(&Point) -> f64, p: &Point) -> Vec<f64> {
    let n = p.v.len();
    let mut g = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let h = 1e-6 * (1.0 + if i < n { p.v[i].abs() } else { p.t.abs() });
        let mut a = p.clone();
        let mut b = p.clone();
        if i < n {
            a.v[i] += h;
            b.v[i] -= h;
        } else {
            a.t += h;
            b.t -= h;
        }
        g.push((f(&a) - f(&b)) / (2.0 * h));
    }
    g
}

/// Horizontal perimeter density `|C(p)n|` for a Euclidean unit normal `n`.
pub fn perimeter_integrand(p: &Point, n: &[f64]) -> f64 {
    let k = p.k();
    let nt = n[2 * k];
    let mut acc = 0.0;
    for i in 0..k {
        let a = n[i] - 0.5 * p.v[i + k] * nt;
        let b = n[k + i] + 0.5 * p.v[i] * nt;
        acc += a * a + b * b;
    }
    acc.sqrt()
}

/// Whether `p` lies within Korányi distance `tol` of the sphere `∂B`.
pub fn near_sphere(b: &Ball, p: &Point, tol: f64) -> bool {
    (knorm4_between(p, &b.center).sqrt().sqrt() - b.radius).abs() <= tol
}

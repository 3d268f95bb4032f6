//! The splitting ℍᵏ = W_ν · L_ν along a direction, with the Heisenberg cones
//! and intrinsic Lipschitz graph checks built on it.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::group::{dot, knorm4, norm2, omega, Coords, Point};
use crate::par;

/// A unit vector ν ∈ 𝕊^{2k−1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    nu: Coords,
}

impl Direction {
    /// Accepts only vectors that are already unit length to 1e-12.
    pub fn new(nu: &[f64]) -> Result<Self> {
        check_even(nu.len())?;
        let len = norm2(nu).sqrt();
        if (len - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("direction has length {len}, expected 1")));
        }
        Ok(Direction { nu: SmallVec::from_slice(nu) })
    }

    /// Normalises a nonzero vector.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        check_even(v.len())?;
        let len = norm2(v).sqrt();
        if !(len > 1e-300) || !len.is_finite() {
            return Err(invalid("cannot normalise a zero or non-finite vector"));
        }
        Ok(Direction { nu: v.iter().map(|x| x / len).collect() })
    }

    /// The standard basis vector e_i of ℝ^{2k}.
    pub fn axis(k: usize, i: usize) -> Self {
        let mut nu: Coords = SmallVec::from_elem(0.0, 2 * k);
        nu[i] = 1.0;
        Direction { nu }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.nu
    }

    pub fn k(&self) -> usize {
        self.nu.len() / 2
    }

    pub fn neg(&self) -> Direction {
        Direction { nu: self.nu.iter().map(|x| -x).collect() }
    }

    /// True when the first coordinate with magnitude above 1e-12 is positive.
    pub fn is_canonical(&self) -> bool {
        self.nu.iter().find(|x| x.abs() > 1e-12).is_none_or(|x| *x > 0.0)
    }

    /// Returns the canonical representative of {ν, −ν} and whether a flip happened.
    pub fn canonical(&self) -> (Direction, bool) {
        if self.is_canonical() {
            (self.clone(), false)
        } else {
            (self.neg(), true)
        }
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.v.len() != self.nu.len() {
            return Err(Error::DimensionMismatch { expected: self.k(), found: p.k() });
        }
        Ok(())
    }
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(invalid(format!("direction must live in an even-dimensional space, got {n}")));
    }
    Ok(())
}

/// π_{W_ν}(p) = (v − ⟨v,ν⟩ν, t − ω(v, ⟨v,ν⟩ν)/2).
pub fn vertical_project(nu: &Direction, p: &Point) -> Point {
    let a = dot(&p.v, &nu.nu);
    let v: Coords = p.v.iter().zip(&nu.nu).map(|(x, n)| x - a * n).collect();
    let t = p.t - 0.5 * a * omega(&p.v, &nu.nu);
    Point { v, t }
}

/// π_{L_ν}(p) = (⟨v,ν⟩ν, 0).
pub fn horizontal_project(nu: &Direction, p: &Point) -> Point {
    let a = dot(&p.v, &nu.nu);
    Point { v: nu.nu.iter().map(|n| a * n).collect(), t: 0.0 }
}

/// The two factors of `p = w · l` with `w ∈ W_ν`, `l ∈ L_ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSplit {
    pub w: Point,
    pub l: Point,
    pub nu: Direction,
}

impl FrameSplit {
    pub fn new(nu: &Direction, p: &Point) -> Result<Self> {
        nu.check_point(p)?;
        Ok(FrameSplit { w: vertical_project(nu, p), l: horizontal_project(nu, p), nu: nu.clone() })
    }

    pub fn recompose(&self) -> Point {
        &self.w * &self.l
    }
}

/// Korányi norm⁴ of π_{W_ν}(p), without allocation.
#[inline]
pub fn vertical_norm4(nu: &[f64], v: &[f64], t: f64) -> f64 {
    let a = dot(v, nu);
    let w2 = (norm2(v) - a * a).max(0.0);
    let tw = t - 0.5 * a * omega(v, nu);
    knorm4(w2, tw)
}

/// The translated cone `apex · C_γ(ν)` with `C_γ(ν) = {‖π_W p‖ ≤ γ ‖π_L p‖}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cone {
    pub gamma: f64,
    pub nu: Direction,
    pub apex: Point,
}

impl Cone {
    pub fn new(gamma: f64, nu: Direction, apex: Point) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("cone opening must be positive, got {gamma}")));
        }
        nu.check_point(&apex)?;
        Ok(Cone { gamma, nu, apex })
    }

    pub fn contains(&self, q: &Point) -> bool {
        in_cone(self.gamma, &self.nu, &self.apex, q)
    }
}

/// Whether `q ∈ apex · C_γ(ν)`.
#[inline]
pub fn in_cone(gamma: f64, nu: &Direction, apex: &Point, q: &Point) -> bool {
    let d: Coords = q.v.iter().zip(&apex.v).map(|(x, y)| x - y).collect();
    let dt = q.t - apex.t - 0.5 * omega(&apex.v, &q.v);
    let lhs4 = vertical_norm4(&nu.nu, &d, dt);
    let a = dot(&d, &nu.nu);
    let g2 = gamma * gamma;
    lhs4 <= g2 * g2 * a * a * a * a
}

/// All ordered pairs `(i, j)`, `i ≠ j`, with `points[j] ∈ points[i] · C_{1/L}(ν)`.
pub fn check_intrinsic_graph(points: &[Point], lip: f64, nu: &Direction) -> Result<Vec<(usize, usize)>> {
    if !(lip > 0.0) {
        return Err(invalid(format!("Lipschitz constant must be positive, got {lip}")));
    }
    for p in points {
        nu.check_point(p)?;
    }
    let gamma = 1.0 / lip;
    let rows = par::map_range(points.len(), |i| {
        let mut out = Vec::new();
        for (j, q) in points.iter().enumerate() {
            if i != j && in_cone(gamma, nu, &points[i], q) {
                out.push((i, j));
            }
        }
        out
    });
    Ok(rows.into_iter().flatten().collect())
}

/// `(‖p‖⁴ − ‖π_L p‖⁴) / ‖π_W p‖⁴`.
pub fn strict_convexity_ratio(nu: &Direction, p: &Point) -> Result<f64> {
    nu.check_point(p)?;
    let w4 = vertical_norm4(&nu.nu, &p.v, p.t);
    let a = dot(&p.v, &nu.nu);
    let p4 = knorm4(norm2(&p.v), p.t);
    if w4 <= 1e-24 * p4 || w4 == 0.0 {
        return Err(Error::Undefined("vertical projection vanishes".into()));
    }
    // ‖p‖⁴ − a⁴ = w²(w² + 2a²) + 16t² with w² = |v|² − a², free of cancellation.
    let w2: f64 = p.v.iter().zip(&nu.nu).map(|(x, n)| (x - a * n).powi(2)).sum();
    Ok((w2 * (w2 + 2.0 * a * a) + 16.0 * p.t * p.t) / w4)
}

/// Grid minimum of the convexity ratio over the k = 1 unit sphere with ν = e₁.
///
/// Rotations of ℝ² preserve ω, so the choice of ν loses nothing. The sphere
/// is parametrised by `v = √cos φ (cos θ, sin θ)`, `t = sin φ / 4`.
pub fn convexity_constant_k1(n_theta: usize, n_phi: usize) -> f64 {
    let nu = Direction::axis(1, 0);
    let mut best = f64::INFINITY;
    for i in 0..n_theta {
        let th = std::f64::consts::TAU * i as f64 / n_theta as f64;
        for j in 0..=n_phi {
            let ph = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * j as f64 / n_phi as f64;
            let rho = ph.cos().max(0.0).sqrt();
            let p = Point::new(&[rho * th.cos(), rho * th.sin()], 0.25 * ph.sin());
            if let Ok(r) = strict_convexity_ratio(&nu, &p) {
                best = best.min(r);
            }
        }
    }
    best
}

/// Orthonormal basis of ν^⊥ used as coordinates on W_ν.
///
/// Built by Gram–Schmidt of e₁, e₂, … against ν and the vectors already kept,
/// discarding residuals shorter than 1e-6, so the basis depends only on ν.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WFrame {
    pub nu: Direction,
    pub basis: Vec<Coords>,
}

impl WFrame {
    pub fn new(nu: &Direction) -> Self {
        let n = nu.nu.len();
        let mut basis: Vec<Coords> = Vec::with_capacity(n - 1);
        for i in 0..n {
            if basis.len() == n - 1 {
                break;
            }
            let mut e: Coords = SmallVec::from_elem(0.0, n);
            e[i] = 1.0;
            let mut r = e.clone();
            for u in std::iter::once(&nu.nu).chain(basis.iter()) {
                let c = dot(&r, u);
                for (x, y) in r.iter_mut().zip(u.iter()) {
                    *x -= c * y;
                }
            }
            let len = norm2(&r).sqrt();
            if len < 1e-6 {
                continue;
            }
            // One re-orthogonalisation pass keeps the basis orthonormal to 1e-15.
            for u in std::iter::once(&nu.nu).chain(basis.iter()) {
                let c = dot(&r, u);
                for (x, y) in r.iter_mut().zip(u.iter()) {
                    *x -= c * y;
                }
            }
            let len = norm2(&r).sqrt();
            basis.push(r.iter().map(|x| x / len).collect());
        }
        WFrame { nu: nu.clone(), basis }
    }

    /// Dimension 2k of W_ν.
    pub fn dim(&self) -> usize {
        self.basis.len() + 1
    }

    /// Coordinates `(⟨v,b₁⟩, …, ⟨v,b_{2k−1}⟩, t)` of a point of W_ν.
    pub fn coords(&self, w: &Point) -> Vec<f64> {
        let mut c: Vec<f64> = self.basis.iter().map(|b| dot(&w.v, b)).collect();
        c.push(w.t);
        c
    }

    /// Writes the horizontal W coordinates of `w` into `out`, returning `t`.
    #[inline]
    pub fn coords_into(&self, v: &[f64], out: &mut [f64]) {
        for (o, b) in out.iter_mut().zip(&self.basis) {
            *o = dot(v, b);
        }
    }

    pub fn point(&self, coords: &[f64]) -> Point {
        let n = self.nu.nu.len();
        let mut v: Coords = SmallVec::from_elem(0.0, n);
        for (c, b) in coords.iter().zip(&self.basis) {
            for (x, y) in v.iter_mut().zip(b.iter()) {
                *x += c * y;
            }
        }
        Point { v, t: coords[n - 1] }
    }
}

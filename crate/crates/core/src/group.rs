//! Heisenberg group algebra and the Korányi metric.
//!
//! Points of ℍᵏ are stored as `(v, t)` with `v ∈ ℝ^{2k}` and `t ∈ ℝ`. The
//! group law is `(v,t)·(v',t') = (v+v', t+t'+ω(v,v')/2)` where
//! `ω(v,v') = Σ_j v_j v'_{j+k} − v_{j+k} v'_j`.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};

/// Horizontal coordinates. Inline storage covers k ≤ 2.
pub type Coords = SmallVec<[f64; 4]>;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub v: Coords,
    pub t: f64,
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {})", self.v.as_slice(), self.t)
    }
}

/// Symplectic form on ℝ^{2k}.
#[inline]
pub fn omega(v: &[f64], w: &[f64]) -> f64 {
    debug_assert_eq!(v.len(), w.len());
    let k = v.len() / 2;
    let mut acc = 0.0;
    for j in 0..k {
        acc += v[j] * w[j + k] - v[j + k] * w[j];
    }
    acc
}

/// The vector `a` with `ω(g, x) = ⟨a, x⟩` for all `x`.
pub fn omega_left_gradient(g: &[f64]) -> Coords {
    let k = g.len() / 2;
    let mut a: Coords = SmallVec::from_elem(0.0, 2 * k);
    for j in 0..k {
        a[j] = -g[j + k];
        a[j + k] = g[j];
    }
    a
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

impl Point {
    pub fn new(v: &[f64], t: f64) -> Self {
        debug_assert!(v.len() % 2 == 0 && !v.is_empty(), "odd horizontal dimension");
        Point { v: SmallVec::from_slice(v), t }
    }

    /// Validating constructor: `v` must have even positive length and every entry must be finite.
    pub fn try_new(v: &[f64], t: f64) -> Result<Self> {
        if v.is_empty() || v.len() % 2 != 0 {
            return Err(invalid(format!("horizontal part has length {}", v.len())));
        }
        if !t.is_finite() || v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        Ok(Self::new(v, t))
    }

    pub fn origin(k: usize) -> Self {
        Point { v: SmallVec::from_elem(0.0, 2 * k), t: 0.0 }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.v.len() / 2
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.v.iter().all(|x| x.is_finite())
    }

    fn check_same(&self, other: &Point) -> Result<()> {
        if self.v.len() != other.v.len() {
            return Err(Error::DimensionMismatch { expected: self.k(), found: other.k() });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Point) -> Result<Point> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    fn mul_unchecked(&self, other: &Point) -> Point {
        let v: Coords = self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect();
        Point { v, t: self.t + other.t + 0.5 * omega(&self.v, &other.v) }
    }

    pub fn inv(&self) -> Point {
        Point { v: self.v.iter().map(|x| -x).collect(), t: -self.t }
    }

    /// Heisenberg dilation `δ_r(v,t) = (rv, r²t)`.
    pub fn try_dilate(&self, r: f64) -> Result<Point> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid(format!("dilation factor must be positive, got {r}")));
        }
        Ok(self.dilate(r))
    }

    #[inline]
    pub fn dilate(&self, r: f64) -> Point {
        debug_assert!(r > 0.0);
        Point { v: self.v.iter().map(|x| r * x).collect(), t: r * r * self.t }
    }

    /// Korányi norm `(|v|⁴ + 16t²)^{1/4}`.
    #[inline]
    pub fn knorm(&self) -> f64 {
        knorm4(norm2(&self.v), self.t).sqrt().sqrt()
    }

    /// Left-invariant Korányi distance `‖q⁻¹·p‖`.
    pub fn try_dist(&self, q: &Point) -> Result<f64> {
        self.check_same(q)?;
        Ok(self.dist(q))
    }

    /// Panics on dimension mismatch in debug builds.
    #[inline]
    pub fn dist(&self, q: &Point) -> f64 {
        knorm4_between(self, q).sqrt().sqrt()
    }

    pub fn horizontal_norm(&self) -> f64 {
        norm2(&self.v).sqrt()
    }
}

/// `|v|⁴ + 16t²` from `|v|²` and `t`.
#[inline]
pub fn knorm4(v2: f64, t: f64) -> f64 {
    v2 * v2 + 16.0 * t * t
}

/// Fourth power of the Korányi distance between `p` and `q`, without allocating.
#[inline]
pub fn knorm4_between(p: &Point, q: &Point) -> f64 {
    debug_assert_eq!(p.v.len(), q.v.len());
    // q⁻¹·p = (p_v − q_v, p_t − q_t − ω(q_v, p_v)/2)
    let mut dv2 = 0.0;
    for (a, b) in p.v.iter().zip(&q.v) {
        let d = a - b;
        dv2 += d * d;
    }
    let tau = p.t - q.t - 0.5 * omega(&q.v, &p.v);
    knorm4(dv2, tau)
}

impl Mul for &Point {
    type Output = Point;

    /// Group product. Panics if the points live in different ℍᵏ.
    fn mul(self, rhs: &Point) -> Point {
        assert_eq!(self.v.len(), rhs.v.len(), "Heisenberg dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Mul for Point {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        &self * &rhs
    }
}

/// Closed Korányi ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn unit(k: usize) -> Self {
        Ball { center: Point::origin(k), radius: 1.0 }
    }

    pub fn k(&self) -> usize {
        self.center.k()
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        let r2 = self.radius * self.radius;
        knorm4_between(p, &self.center) <= r2 * r2
    }

    /// Strict interior test with a relative margin.
    pub fn contains_strictly(&self, p: &Point, rel_margin: f64) -> bool {
        p.dist(&self.center) < self.radius * (1.0 - rel_margin)
    }

    pub fn left_translate(&self, g: &Point) -> Ball {
        Ball { center: g * &self.center, radius: self.radius }
    }

    pub fn dilate(&self, r: f64) -> Ball {
        Ball { center: self.center.dilate(r), radius: self.radius * r }
    }

    /// Half-widths of the axis-aligned Euclidean box containing the ball,
    /// as `(horizontal, vertical)` around the center.
    pub fn euclidean_half_widths(&self) -> (f64, f64) {
        let r = self.radius;
        (r, 0.25 * r * r + 0.5 * self.center.horizontal_norm() * r)
    }
}

/// Run-time dimension context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDim {
    k: usize,
}

impl GroupDim {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        Ok(GroupDim { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Dimension of ℝ^{2k}.
    pub fn horizontal_dim(&self) -> usize {
        2 * self.k
    }

    /// Hausdorff dimension of ℍᵏ.
    pub fn homogeneous_dim(&self) -> usize {
        2 * self.k + 2
    }

    /// Hausdorff dimension of hypersurfaces.
    pub fn surface_dim(&self) -> usize {
        2 * self.k + 1
    }

    pub fn origin(&self) -> Point {
        Point::origin(self.k)
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.v.len() != 2 * self.k {
            return Err(Error::DimensionMismatch { expected: self.k, found: p.v.len() / 2 });
        }
        Ok(())
    }

    /// Surface measure of the unit sphere 𝕊^{2k−1} ⊂ ℝ^{2k}, `2π^k/(k−1)!`.
    pub fn sphere_area(&self) -> f64 {
        let fact: f64 = (1..self.k).map(|i| i as f64).product();
        2.0 * std::f64::consts::PI.powi(self.k as i32) / fact
    }
}

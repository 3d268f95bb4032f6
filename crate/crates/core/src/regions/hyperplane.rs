//! Affine hyperplanes `{(v,t) : ⟨m, (v,t)⟩ = b}` of ℍᵏ ≅ ℝ^{2k+1}.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frames::Direction;
use crate::group::{dot, norm2, omega_left_gradient, Point};
use crate::optimize::monotone_cubic_root;

/// Threshold on |m_t| below which a unit normal counts as vertical.
pub const VERTICAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneClass {
    Vertical,
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    /// Euclidean unit normal; the last entry is the t component.
    pub m: Vec<f64>,
    pub b: f64,
    pub class: PlaneClass,
}

impl Hyperplane {
    /// Normalises `(m, b)` so that `|m| = 1`.
    pub fn new(m: &[f64], b: f64) -> Result<Self> {
        if m.len() < 3 || m.len() % 2 == 0 {
            return Err(invalid(format!("normal must have length 2k+1, got {}", m.len())));
        }
        let len = norm2(m).sqrt();
        if !(len > 1e-300) || !len.is_finite() || !b.is_finite() {
            return Err(invalid("hyperplane normal must be finite and nonzero"));
        }
        let m: Vec<f64> = m.iter().map(|x| x / len).collect();
        let b = b / len;
        let class = if m[m.len() - 1].abs() <= VERTICAL_TOL { PlaneClass::Vertical } else { PlaneClass::Horizontal };
        Ok(Hyperplane { m, b, class })
    }

    /// `{⟨v, ν⟩ = b}`, the left translate `(bν, 0)·W_ν`.
    pub fn vertical(nu: &Direction, b: f64) -> Self {
        let mut m = nu.as_slice().to_vec();
        m.push(0.0);
        Hyperplane { m, b, class: PlaneClass::Vertical }
    }

    /// The plane `q·H` where `H = ℝ^{2k} × {0}`.
    pub fn horizontal_through(q: &Point) -> Self {
        // q·H = {t = q_t + ω(q_v, v)/2}
        let a = omega_left_gradient(&q.v);
        let mut m: Vec<f64> = a.iter().map(|x| -0.5 * x).collect();
        m.push(1.0);
        Hyperplane::new(&m, q.t).expect("finite point gives a valid plane")
    }

    pub fn k(&self) -> usize {
        (self.m.len() - 1) / 2
    }

    pub fn is_vertical(&self) -> bool {
        self.class == PlaneClass::Vertical
    }

    pub fn normal_v(&self) -> &[f64] {
        &self.m[..self.m.len() - 1]
    }

    pub fn normal_t(&self) -> f64 {
        self.m[self.m.len() - 1]
    }

    /// Signed Euclidean residual `⟨m, x⟩ − b`.
    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        dot(self.normal_v(), &p.v) + self.normal_t() * p.t - self.b
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.v.len() + 1 != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.k(), found: p.k() });
        }
        Ok(())
    }

    /// The unique `p` with `P = p·H`, for non-vertical planes.
    pub fn center(&self) -> Option<Point> {
        if self.is_vertical() {
            return None;
        }
        let k = self.k();
        let mt = self.normal_t();
        let mut v = vec![0.0; 2 * k];
        for j in 0..k {
            v[j] = -2.0 * self.m[j + k] / mt;
            v[j + k] = 2.0 * self.m[j] / mt;
        }
        Some(Point::new(&v, self.b / mt))
    }

    /// The image `g·P`.
    pub fn left_translate(&self, g: &Point) -> Hyperplane {
        let a = omega_left_gradient(&g.v);
        let mt = self.normal_t();
        let mut m: Vec<f64> = self.normal_v().iter().zip(&a).map(|(mv, ai)| mv - 0.5 * mt * ai).collect();
        m.push(mt);
        let b = self.b + dot(self.normal_v(), &g.v) + mt * g.t;
        let mut out = Hyperplane::new(&m, b).expect("translation keeps the normal nonzero");
        if self.is_vertical() {
            // Left translation maps vertical planes to vertical planes exactly.
            let last = out.m.len() - 1;
            out.m[last] = 0.0;
            out.class = PlaneClass::Vertical;
        }
        out
    }

    /// The image `δ_r P`.
    pub fn dilate(&self, r: f64) -> Hyperplane {
        let mut m: Vec<f64> = self.normal_v().iter().map(|x| x * r).collect();
        m.push(self.normal_t());
        let mut out = Hyperplane::new(&m, self.b * r * r).expect("dilation keeps the normal nonzero");
        out.class = self.class;
        out
    }

    /// Korányi distance from `q` to the plane, with a closest point.
    ///
    /// After translating `q` to the origin the plane reads `t = β − ⟨a, v⟩`;
    /// for `|v| = x` the best choice puts `v` along `a`, leaving the
    /// one-variable problem `min x⁴ + 16(|β| − |a|x)₊²`, whose stationarity
    /// condition is the increasing cubic `x³ + 8|a|²x − 8|a||β| = 0`.
    pub fn distance_with_foot(&self, q: &Point) -> (f64, Point) {
        let local = self.left_translate(&q.inv());
        let mv = local.normal_v();
        let mt = local.normal_t();
        let n = mv.len();
        if local.is_vertical() {
            let len = norm2(mv).sqrt();
            let s = local.b / len;
            let v: Vec<f64> = mv.iter().map(|x| s * x / len).collect();
            let foot = q * &Point::new(&v, 0.0);
            return (s.abs(), foot);
        }
        let beta = local.b / mt;
        let a: Vec<f64> = mv.iter().map(|x| x / mt).collect();
        let alen = norm2(&a).sqrt();
        if alen == 0.0 {
            let foot = q * &Point::new(&vec![0.0; n], beta);
            return (2.0 * beta.abs().sqrt(), foot);
        }
        let x = monotone_cubic_root(8.0 * alen * alen, -8.0 * alen * beta.abs());
        let gap = (beta.abs() - alen * x).max(0.0);
        let d4 = x.powi(4) + 16.0 * gap * gap;
        let v: Vec<f64> = a.iter().map(|ai| beta.signum() * x * ai / alen).collect();
        let t = beta - dot(&a, &v);
        let foot = q * &Point::new(&v, t);
        (d4.sqrt().sqrt(), foot)
    }

    pub fn distance(&self, q: &Point) -> f64 {
        self.distance_with_foot(q).0
    }

    /// Orthonormal basis of the plane's direction space in ℝ^{2k+1}.
    pub fn tangent_basis(&self) -> Vec<Vec<f64>> {
        let n = self.m.len();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
        for i in 0..n {
            if basis.len() == n - 1 {
                break;
            }
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            for _ in 0..2 {
                for u in std::iter::once(&self.m).chain(basis.iter()) {
                    let c = dot(&r, u);
                    r.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
                }
            }
            let len = norm2(&r).sqrt();
            if len > 1e-6 {
                basis.push(r.iter().map(|x| x / len).collect());
            }
        }
        basis
    }

    /// Euclidean foot of the origin, `b·m`.
    pub fn euclidean_anchor(&self) -> Vec<f64> {
        self.m.iter().map(|x| x * self.b).collect()
    }
}

/// `α_p(P)`: Euclidean distance between the horizontal parts of `p` and the
/// center of `P`, or `+∞` for vertical planes.
pub fn alpha(p: &Point, plane: &Hyperplane) -> f64 {
    match plane.center() {
        None => f64::INFINITY,
        Some(c) => p.v.iter().zip(&c.v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::{nelder_mead, NelderMeadOptions};

    #[test]
    fn h_and_its_center() {
        let h = Hyperplane::horizontal_through(&Point::origin(1));
        assert_eq!(h.m, vec![0.0, 0.0, 1.0]);
        assert_eq!(h.center().unwrap(), Point::origin(1));
        let q = Point::new(&[0.4, -1.3], 0.7);
        let c = Hyperplane::horizontal_through(&q).center().unwrap();
        assert!(c.dist(&q) < 1e-12);
        assert!(Hyperplane::vertical(&Direction::axis(1, 0), 1.0).center().is_none());
    }

    #[test]
    fn translation_and_dilation_move_points() {
        let p = Hyperplane::new(&[0.3, -0.4, 0.8], 0.2).unwrap();
        let g = Point::new(&[1.0, 2.0], -0.5);
        let gp = p.left_translate(&g);
        let dp = p.dilate(1.7);
        let basis = p.tangent_basis();
        let anchor = p.euclidean_anchor();
        for i in 0..5 {
            let s = [0.3 * i as f64 - 0.5, 0.7 - 0.2 * i as f64];
            let x: Vec<f64> = (0..3).map(|d| anchor[d] + s[0] * basis[0][d] + s[1] * basis[1][d]).collect();
            let x = Point::new(&x[..2], x[2]);
            assert!(p.eval(&x).abs() < 1e-12);
            assert!(gp.eval(&(&g * &x)).abs() < 1e-12);
            assert!(dp.eval(&x.dilate(1.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_distance_is_affine_gap() {
        let nu = Direction::normalized(&[1.0, 2.0]).unwrap();
        let w = Hyperplane::vertical(&nu, 0.3);
        let q = Point::new(&[2.0, -1.0], 5.0);
        let want = (dot(&q.v, nu.as_slice()) - 0.3).abs();
        let (d, foot) = w.distance_with_foot(&q);
        assert!((d - want).abs() < 1e-14);
        assert!(w.eval(&foot).abs() < 1e-12);
        assert!((foot.dist(&q) - d).abs() < 1e-12);
    }

    #[test]
    fn distance_matches_direct_minimisation() {
        let planes = [
            Hyperplane::horizontal_through(&Point::origin(1)),
            Hyperplane::new(&[0.2, 0.5, 0.8], -0.3).unwrap(),
            Hyperplane::new(&[1.0, 0.0, 1e-3], 0.5).unwrap(),
        ];
        let qs = [Point::new(&[0.0, 0.0], 1.0), Point::new(&[1.0, -0.5], 0.2), Point::new(&[-2.0, 0.3], -0.7)];
        for p in &planes {
            let basis = p.tangent_basis();
            let anchor = p.euclidean_anchor();
            for q in &qs {
                let (d, foot) = p.distance_with_foot(q);
                assert!(p.eval(&foot).abs() < 1e-10);
                assert!((foot.dist(q) - d).abs() < 1e-9);
                let obj = |s: &[f64]| {
                    let x: Vec<f64> = (0..3).map(|i| anchor[i] + s[0] * basis[0][i] + s[1] * basis[1][i]).collect();
                    Point::new(&x[..2], x[2]).dist(q)
                };
                let opts = NelderMeadOptions { rel_tol: 1e-13, max_iter: 4000, initial_step: 0.5, abs_floor: 1e-12 };
                let mut best = f64::INFINITY;
                for start in [[0.0, 0.0], [1.0, 1.0], [-1.0, 0.5], [2.0, -2.0]] {
                    best = best.min(nelder_mead(obj, &start, &opts).value);
                }
                assert!(d <= best + 1e-9, "closed form {d} above search {best}");
                assert!(d >= best - 1e-6, "closed form {d} far below search {best}");
            }
        }
    }

    #[test]
    fn point_on_axis_to_h() {
        let h = Hyperplane::horizontal_through(&Point::origin(1));
        assert!((h.distance(&Point::new(&[0.0, 0.0], 0.25)) - 1.0).abs() < 1e-15);
        assert_eq!(alpha(&Point::new(&[3.0, 4.0], 1.0), &h), 5.0);
    }
}

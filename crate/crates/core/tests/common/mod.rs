//! Reference formulas written out by hand, independent of the library code.
#![allow(dead_code)]

use heisur::Point;

/// `(v, t)` as plain vectors.
pub fn parts(p: &Point) -> (Vec<f64>, f64) {
    (p.v.to_vec(), p.t)
}

pub fn sympl(v: &[f64], w: &[f64]) -> f64 {
    let k = v.len() / 2;
    (0..k).map(|j| v[j] * w[k + j] - v[k + j] * w[j]).sum::<f64>()
}

pub fn mul(a: &Point, b: &Point) -> (Vec<f64>, f64) {
    let v: Vec<f64> = a.v.iter().zip(&b.v).map(|(x, y)| x + y).collect();
    (v, a.t + b.t + 0.5 * sympl(&a.v, &b.v))
}

pub fn koranyi(v: &[f64], t: f64) -> f64 {
    let v2: f64 = v.iter().map(|x| x * x).sum();
    (v2 * v2 + 16.0 * t * t).sqrt().sqrt()
}

/// `‖q⁻¹ p‖` expanded coordinate-wise.
pub fn dist(p: &Point, q: &Point) -> f64 {
    let dv: Vec<f64> = p.v.iter().zip(&q.v).map(|(a, b)| a - b).collect();
    let dt = p.t - q.t - 0.5 * sympl(&q.v, &p.v);
    koranyi(&dv, dt)
}

/// `π_W(p)` for `W = ν^⊥ × ℝ`: `p · (−⟨v,ν⟩ν, 0)`.
pub fn vertical_part(nu: &[f64], v: &[f64], t: f64) -> (Vec<f64>, f64) {
    let a: f64 = v.iter().zip(nu).map(|(x, n)| x * n).sum();
    let minus_l: Vec<f64> = nu.iter().map(|n| -a * n).collect();
    let w: Vec<f64> = v.iter().zip(&minus_l).map(|(x, y)| x + y).collect();
    (w, t + 0.5 * sympl(v, &minus_l))
}

/// Whether `q` lies in the closed cone `apex · {‖π_W‖ ≤ γ ‖π_L‖}`.
pub fn cone_contains(gamma: f64, nu: &[f64], apex: &Point, q: &Point) -> bool {
    let dv: Vec<f64> = q.v.iter().zip(&apex.v).map(|(a, b)| a - b).collect();
    let dt = q.t - apex.t - 0.5 * sympl(&apex.v, &q.v);
    let a: f64 = dv.iter().zip(nu).map(|(x, n)| x * n).sum();
    let (w, wt) = vertical_part(nu, &dv, dt);
    koranyi(&w, wt) <= gamma * a.abs() * (1.0 + 1e-12)
}

/// Composite Gauss–Legendre (5 nodes) of `f` on `[a, b]` with `n` panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let mid = a + (i as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(&W) {
            acc += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * acc
}

/// `∫_0^1 √(1 − x⁴) dx`, with the endpoint square-root singularity removed by
/// the substitution `x = 1 − u²`.
pub fn quartic_disc_area() -> f64 {
    gauss_legendre(
        |u| {
            let x: f64 = 1.0 - u * u;
            2.0 * u * (1.0 - x.powi(4)).max(0.0).sqrt()
        },
        0.0,
        1.0,
        2000,
    )
}

/// `|A Δ J|` on sorted disjoint segments `a`.
pub fn symmetric_difference(a: &[(f64, f64)], j: Option<(f64, f64)>) -> f64 {
    let len_a: f64 = a.iter().map(|s| s.1 - s.0).sum();
    match j {
        None => len_a,
        Some((lo, hi)) => {
            let overlap: f64 = a.iter().map(|s| (s.1.min(hi) - s.0.max(lo)).max(0.0)).sum();
            len_a + (hi - lo) - 2.0 * overlap
        }
    }
}

/// Brute-force minimum of `|A Δ J|` over `J = ∅` and intervals with
/// endpoints on the grid of step `h` covering `[lo, hi]`.
pub fn grid_nc(a: &[(f64, f64)], lo: f64, hi: f64, h: f64) -> f64 {
    let m = ((hi - lo) / h).ceil() as usize;
    let xs: Vec<f64> = (0..=m).map(|i| (lo + i as f64 * h).min(hi)).collect();
    let mut best = symmetric_difference(a, None);
    for (i, &x) in xs.iter().enumerate() {
        for &y in &xs[i + 1..] {
            best = best.min(symmetric_difference(a, Some((x, y))));
        }
    }
    best
}

/// Euclidean angle between `e_t` and the plane through three points (k = 1).
pub fn angle_to_t_axis(p0: &[f64; 3], p1: &[f64; 3], p2: &[f64; 3]) -> f64 {
    let a = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
    let b = [p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]];
    let n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    (n[2].abs() / len).min(1.0).asin()
}

/// Least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

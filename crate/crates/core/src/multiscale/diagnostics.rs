//! Tilt diagnostics for non-vertical planes and their vertical surrogates.

use crate::error::Result;
use crate::group::{Ball, Point};
use crate::regions::{alpha, Hyperplane, Surface};

use super::beta::{fit_beta, BetaMode, BetaOptions};

/// `(α, arctan(2/α))`, with `α = +∞` and angle `0` for vertical planes.
pub fn alpha_and_angle(p: &Point, plane: &Hyperplane) -> (f64, f64) {
    let a = alpha(p, plane);
    let angle = if a.is_infinite() { 0.0 } else if a == 0.0 { std::f64::consts::FRAC_PI_2 } else { (2.0 / a).atan() };
    (a, angle)
}

/// Smallest Euclidean angle between the t-axis and the lines of `p⁻¹·P`
/// through its point on the t-axis.
///
/// This is the angle between `e_t` and its orthogonal projection onto the
/// tangent space of the translated plane; it is `π/2` when `e_t` is normal to
/// that plane.
pub fn axis_angle(p: &Point, plane: &Hyperplane) -> f64 {
    let moved = plane.left_translate(&p.inv());
    let basis = moved.tangent_basis();
    let n = moved.m.len();
    let mut proj = vec![0.0; n];
    for e in &basis {
        let c = e[n - 1];
        for (x, y) in proj.iter_mut().zip(e) {
            *x += c * y;
        }
    }
    let along = proj.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut perp2 = 0.0;
    for (i, x) in proj.iter().enumerate() {
        let et = if i == n - 1 { 1.0 } else { 0.0 };
        perp2 += (et - x) * (et - x);
    }
    perp2.sqrt().atan2(along)
}

/// Best vertical approximation of `plane` on `ball`, with its unnormalised
/// two-sided sup-distance.
pub fn vertical_surrogate(plane: &Hyperplane, ball: &Ball, opts: &BetaOptions) -> Result<(Hyperplane, f64)> {
    if plane.is_vertical() {
        return Ok((plane.clone(), 0.0));
    }
    let r = fit_beta(&Surface::Hyperplane(plane.clone()), &ball.center, ball.radius, BetaMode::BilateralVertical, opts)?;
    Ok((r.plane, r.value * ball.radius))
}

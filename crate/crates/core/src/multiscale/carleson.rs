//! Carleson-type packing sums over cubes and over dyadic scales.

use serde::{Deserialize, Serialize};

use super::beta::{fit_beta, BetaMode, BetaOptions};
use super::cubes::CubeForest;
use crate::error::{invalid, Result};
use crate::group::{Ball, Point};
use crate::lines::TraceOptions;
use crate::monotonicity::width_ball;
use crate::par;
use crate::regions::{surface_sample, Cloud, SampleOptions, Surface};

/// `C₀ · β(c_Q, C₀ ℓ(Q))` for one cube.
pub fn cube_beta(forest: &CubeForest, id: usize, cloud: &Cloud, x: &Surface, mode: BetaMode, opts: &BetaOptions) -> Result<f64> {
    let c0 = forest.options.c0;
    let q = &forest.cubes[id];
    let center = &cloud.points[q.center];
    let r = fit_beta(x, center, c0 * q.side(), mode, &BetaOptions { seed: opts.seed ^ id as u64, ..*opts })?;
    Ok(c0 * r.value)
}

/// Cube β-numbers for the listed cubes, in the order given.
pub fn cube_betas(forest: &CubeForest, ids: &[usize], cloud: &Cloud, x: &Surface, mode: BetaMode, opts: &BetaOptions) -> Result<Vec<f64>> {
    par::map_slice(ids, |&id| cube_beta(forest, id, cloud, x, mode, opts)).into_iter().collect()
}

/// `Σ ℓ(Q)^{2k+1}` over the cubes `Q ⊆ Q₀` whose β exceeds `eps`.
///
/// `betas[i]` belongs to cube `ids[i]`; cubes of the subtree missing from
/// `ids` count as good.
pub fn carleson_sum(forest: &CubeForest, root: usize, eps: f64, ids: &[usize], betas: &[f64], k: usize) -> f64 {
    let mut beta_of = vec![None; forest.cubes.len()];
    for (&id, &b) in ids.iter().zip(betas) {
        beta_of[id] = Some(b);
    }
    forest
        .subtree(root)
        .into_iter()
        .filter(|&id| beta_of[id].is_some_and(|b| b > eps))
        .map(|id| forest.cubes[id].side().powi(2 * k as i32 + 1))
        .fold(0.0, |a, b| a + b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthCarleson {
    pub radius: f64,
    pub eps: f64,
    pub lhs: f64,
    /// `R^{2k+1} / ε`.
    pub bound: f64,
    /// Per-scale surface measure of the bad set.
    pub per_scale: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthCarlesonOptions {
    pub scales: usize,
    pub cloud_size: usize,
    pub n_lines: usize,
}

impl Default for WidthCarlesonOptions {
    fn default() -> Self {
        WidthCarlesonOptions { scales: 4, cloud_size: 200, n_lines: 400 }
    }
}

/// Dyadic Riemann sum for `∫₀^R σ{q ∈ X ∩ B(p,R) : width_{B(q,s)}(X) > ε} ds/s`.
///
/// The surface measure is the weight of a sampled cloud on `X ∩ B(p, R)`;
/// scale `s_i = R 2^{-i}` carries weight `ln 2`.
pub fn width_carleson(x: &Surface, p: &Point, radius: f64, eps: f64, seed: u64, opts: &WidthCarlesonOptions) -> Result<WidthCarleson> {
    if !(radius > 0.0) || !(eps > 0.0) || opts.scales == 0 {
        return Err(invalid("width_carleson needs R > 0, eps > 0 and at least one scale"));
    }
    let k = p.k();
    let cloud = surface_sample(x, &Ball { center: p.clone(), radius }, opts.cloud_size, seed, &SampleOptions::default())?;
    let trace = TraceOptions::default();
    let mut per_scale = Vec::with_capacity(opts.scales);
    for i in 0..opts.scales {
        let s = radius * 0.5f64.powi(i as i32);
        let bad = par::map_range(cloud.len(), |j| {
            let ball = Ball { center: cloud.points[j].clone(), radius: s };
            let line_seed = seed.wrapping_add(((i as u64) << 32) | j as u64);
            width_ball(x, &ball, opts.n_lines, line_seed, &trace).map(|w| w.value > eps)
        });
        let mut m = 0.0;
        for (j, b) in bad.into_iter().enumerate() {
            if b? {
                m += cloud.weights[j];
            }
        }
        per_scale.push(m);
    }
    let lhs = std::f64::consts::LN_2 * per_scale.iter().sum::<f64>();
    Ok(WidthCarleson { radius, eps, lhs, bound: radius.powi(2 * k as i32 + 1) / eps, per_scale })
}

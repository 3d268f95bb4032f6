//! Greedy cone-separated subsets.

use crate::frames::{in_cone, Direction};
use crate::group::Ball;
use crate::regions::Cloud;

/// Greedy subset of the cloud points inside `ball` on which no point lies in
/// another's cone `p·C_γ(ν)`.
///
/// Points are visited in index order; a point is kept when it has no cone
/// relation, in either direction, with the points already kept.
pub fn extract_graph_piece(cloud: &Cloud, ball: &Ball, gamma: f64, nu: &Direction) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for i in cloud.indices_in(ball) {
        let p = &cloud.points[i];
        let clash = kept.iter().any(|&j| {
            let q = &cloud.points[j];
            in_cone(gamma, nu, q, p) || in_cone(gamma, nu, p, q)
        });
        if !clash {
            kept.push(i);
        }
    }
    kept
}

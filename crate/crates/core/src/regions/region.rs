//! Open/closed regions given by membership oracles.

use serde::{Deserialize, Serialize};

use crate::group::{Ball, Point};
use crate::regions::hyperplane::Hyperplane;
use crate::regions::surface::Surface;

/// A measurable set `A ⊂ ℍᵏ` with an exact membership test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Empty { k: usize },
    Full { k: usize },
    /// The open side `⟨m, x⟩ > b` of a hyperplane.
    HalfSpace { plane: Hyperplane },
    /// A closed Korányi ball.
    Ball { ball: Ball },
    UnionOfBalls { balls: Vec<Ball> },
    Complement { inner: Box<Region> },
}

impl Region {
    pub fn k(&self) -> usize {
        match self {
            Region::Empty { k } | Region::Full { k } => *k,
            Region::HalfSpace { plane } => plane.k(),
            Region::Ball { ball } => ball.k(),
            Region::UnionOfBalls { balls } => balls.first().map_or(1, |b| b.k()),
            Region::Complement { inner } => inner.k(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Empty { .. } => false,
            Region::Full { .. } => true,
            Region::HalfSpace { plane } => plane.eval(p) > 0.0,
            Region::Ball { ball } => ball.contains(p),
            Region::UnionOfBalls { balls } => balls.iter().any(|b| b.contains(p)),
            Region::Complement { inner } => !inner.contains(p),
        }
    }

    pub fn complement(&self) -> Region {
        match self {
            Region::Empty { k } => Region::Full { k: *k },
            Region::Full { k } => Region::Empty { k: *k },
            Region::Complement { inner } => (**inner).clone(),
            other => Region::Complement { inner: Box::new(other.clone()) },
        }
    }

    /// The topological boundary as a surface, when nonempty.
    pub fn boundary(&self) -> Option<Surface> {
        match self {
            Region::Empty { .. } | Region::Full { .. } => None,
            Region::HalfSpace { plane } => Some(Surface::Hyperplane(plane.clone())),
            Region::Ball { ball } => Some(Surface::Sphere(ball.clone())),
            Region::UnionOfBalls { balls } => Some(Surface::UnionBoundary(balls.clone())),
            Region::Complement { inner } => inner.boundary(),
        }
    }

    /// A ball containing the region (or its complement, for complements).
    pub fn bounding_ball(&self) -> Option<Ball> {
        match self {
            Region::Ball { ball } => Some(ball.clone()),
            Region::UnionOfBalls { balls } if !balls.is_empty() => {
                let c = balls[0].center.clone();
                let r = balls.iter().map(|b| c.dist(&b.center) + b.radius).fold(0.0, f64::max);
                Ball::new(c, r).ok()
            }
            Region::Complement { inner } => inner.bounding_ball(),
            _ => None,
        }
    }

    pub fn left_translate(&self, g: &Point) -> Region {
        match self {
            Region::HalfSpace { plane } => Region::HalfSpace { plane: plane.left_translate(g) },
            Region::Ball { ball } => Region::Ball { ball: ball.left_translate(g) },
            Region::UnionOfBalls { balls } => {
                Region::UnionOfBalls { balls: balls.iter().map(|b| b.left_translate(g)).collect() }
            }
            Region::Complement { inner } => Region::Complement { inner: Box::new(inner.left_translate(g)) },
            other => other.clone(),
        }
    }

    pub fn dilate(&self, r: f64) -> Region {
        match self {
            Region::HalfSpace { plane } => Region::HalfSpace { plane: plane.dilate(r) },
            Region::Ball { ball } => Region::Ball { ball: ball.dilate(r) },
            Region::UnionOfBalls { balls } => Region::UnionOfBalls { balls: balls.iter().map(|b| b.dilate(r)).collect() },
            Region::Complement { inner } => Region::Complement { inner: Box::new(inner.dilate(r)) },
            other => other.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Region::Empty { .. } => "empty".into(),
            Region::Full { .. } => "full".into(),
            Region::HalfSpace { .. } => "half-space".into(),
            Region::Ball { .. } => "ball".into(),
            Region::UnionOfBalls { balls } => format!("union-of-balls({})", balls.len()),
            Region::Complement { inner } => format!("complement({})", inner.describe()),
        }
    }
}

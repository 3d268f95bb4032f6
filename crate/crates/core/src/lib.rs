//! Quantitative rectifiability toolkit for the Heisenberg group ℍᵏ.
//!
//! Module map:
//!
//! - [`group`]: group law, Korányi metric, balls.
//! - [`frames`]: vertical/horizontal splitting, cones, intrinsic graphs.
//! - [`lines`]: horizontal lines and the invariant line measure 𝔥.
//! - [`regions`]: regions, surfaces, clouds, vertical projections.
//! - [`monotonicity`]: non-monotonicity and width along lines and over balls.
//! - [`multiscale`]: David cubes, β-numbers, packing sums.
//! - [`harness`]: reproducible experiments with CSV/JSON reports.

pub mod error;
pub mod frames;
pub mod group;
pub mod optimize;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
pub use frames::{Cone, Direction, FrameSplit, WFrame};
pub use group::{Ball, GroupDim, Point};
pub mod lines;
pub mod monotonicity;
pub mod multiscale;
pub mod regions;
pub mod harness;

pub use lines::{Estimate, HorizontalLine};
pub use regions::{Cloud, Hyperplane, Region, Surface};

//! Multiscale analysis on David cubes built over surface clouds.

pub mod beta;
pub mod carleson;
pub mod cubes;
pub mod diagnostics;
pub mod extract;

pub use beta::{fit_beta, BetaMode, BetaOptions, BetaResult};
pub use carleson::{carleson_sum, cube_beta, cube_betas, width_carleson, WidthCarleson, WidthCarlesonOptions};
pub use cubes::{build_cubes, check_cubes, forest_table, CubeForest, CubeInvariants, CubeOptions, CubeRow, DavidCube};
pub use diagnostics::{alpha_and_angle, axis_angle, vertical_surrogate};
pub use extract::extract_graph_piece;

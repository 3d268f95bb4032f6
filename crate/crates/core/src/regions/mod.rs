//! Sets and surfaces in ℍᵏ, with their sampling and vertical projections.

pub mod cloud;
pub mod hyperplane;
pub mod projection;
pub mod region;
pub mod sampling;
pub mod surface;

pub use cloud::{ahlfors_stats, AhlforsStats, Cloud};
pub use hyperplane::{alpha, Hyperplane, PlaneClass};
pub use projection::{favard_average, projection_measure, ProjectionOptions};
pub use region::Region;
pub use sampling::{surface_sample, SampleOptions};
pub use surface::{perimeter_integrand, GraphSpec, IntrinsicGraph, Surface};

//! Computational domains and seeded collocation sampling.

mod domain;
mod polygon;

pub use domain::{sample_boundary, sample_interior, BoundaryGroup, Domain, BOUNDARY_MARGIN};
pub use polygon::{koch_polygon, Polygon, MAX_KOCH_LEVEL};

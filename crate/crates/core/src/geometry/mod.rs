//! Gauge-function representation of star-shaped planar domains.
//!
//! A positive 2π-periodic `u` describes `Ω_u = {(r, θ) : r < 1/u(θ)}`; the
//! domain is convex exactly when `u'' + u ≥ 0` in the weak sense.

mod gauge;
mod measure;
mod polygon;
mod projection;
mod residual;

pub use gauge::{boundary_jet, curvature, BoundaryJet, GaugeFunction};
pub use measure::{area_gradient, area_perimeter, perimeter_gradient, AreaPerimeter, Order};
pub use polygon::{detect_polygon, ArcSegment, PolygonOptions, PolygonReport, Vertex};
pub use projection::{project_admissible, project_samples, Annulus, ProjectionOptions};
pub use residual::{convexity_residual, cone_tolerance, second_difference, ConvexityResidual};

//! Shape calculus for quadratic elliptic energies on star-shaped planar domains.
//!
//! Domains are described by gauge functions `u` on the circle, `Ω_u = {r < 1/u(θ)}`.
//! The crate computes first and second shape derivatives of
//! `E(Ω) = ∫_Ω K(x, U, ∇U)` (with `U` the Dirichlet solution of a linear elliptic
//! equation) by transporting everything to a fixed finite-element mesh and
//! solving for material derivatives, measures their growth in fractional
//! Sobolev norms, and minimizes convexity-constrained functionals of the form
//! `R(E, |Ω|) − P(Ω)`.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod optimize;
pub mod plot;
pub mod scalar;
pub mod shapecalc;
pub mod small;
pub mod sobolev;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision gauge function.
pub type Gauge = geometry::GaugeFunction<f64>;
/// Double-precision convexity residual.
pub type Residual = geometry::ConvexityResidual<f64>;
/// Double-precision reference disk mesh.
pub type Mesh = fem::DiskMesh<f64>;
/// Double-precision mesh mapped onto `Ω_u`.
pub type Mapped = fem::MappedMesh<f64>;
/// Double-precision elliptic problem.
pub type Problem = fem::EllipticProblem<f64>;
/// Double-precision solved state.
pub type State = fem::StateBundle<f64>;
/// Double-precision shape derivatives.
pub type Derivatives = shapecalc::ShapeDerivatives<f64>;
/// Double-precision finite-difference report.
pub type FdReport = shapecalc::FdReport<f64>;
/// Double-precision ratio sweep.
pub type SweepReport = verify::SweepReport<f64>;
/// Double-precision coercivity probe.
pub type CoercivityReport = verify::CoercivityReport<f64>;
/// Double-precision optimization result.
pub type OptimizationResult = optimize::OptimizationResult<f64>;
/// Double-precision annulus.
pub type Annulus = geometry::Annulus<f64>;

/// Version of this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! P1 finite elements on mapped disk meshes.

pub mod assembly;
pub mod field;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod state;

pub use field::{constant, Constant, Field, FnField, Polynomial, RadialBump, ScalarField, SymMatField, VecField};
pub use mesh::{build_mesh, DiskMesh, Element, MappedMesh};
pub use problem::{EllipticProblem, Ellipticity, Integrand, Problem};
pub use quadrature::Rule;
pub use state::{integrate_k, solve_on, solve_state, StateBundle, StateOperator};

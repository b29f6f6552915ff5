//! First and second shape derivatives through transported coefficients and
//! material derivatives on the fixed mesh of `Ω₀`.

pub mod deformation;
pub mod derivatives;
pub mod jet;
pub mod validate;

pub use deformation::{w1inf_norm, DeformationField, Profile};
pub use derivatives::{
    energy_first, energy_first_adjoint, energy_second, energy_second_adjoint, nodal_sensitivity, rhs_first,
    rhs_second, solve_adjoint, solve_md1, solve_md2, transport_jet, LoadJet, MdSolve, Method, OperatorJet,
    ShapeContext, ShapeDerivatives, ShapeOptions, TransportJet,
};
pub use jet::{check_jet, coefficient_jet, transported, Coefficients, Group, Jet, JetCheck};
pub use validate::{fd_validate, shape_derivatives, write_derivative_csv, FdReport, FdRow};

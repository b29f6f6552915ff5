//! Dirichlet state solve on a mapped mesh.

use std::sync::Arc;

use super::assembly::{self, FormCoeffs};
use super::mesh::{DiskMesh, MappedMesh};
use super::problem::{EllipticProblem, Integrand};
use super::quadrature::Rule;
use crate::error::Result;
use crate::geometry::GaugeFunction;
use crate::linalg::{self, bicgstab, pcg, CsrMatrix, KrylovOptions, Preconditioner, SolveStats};
use crate::small::Vec2;
use crate::Real;

/// Stiffness pointwise coefficients of the state operator.
pub fn state_coeffs<T: Real>(prob: &EllipticProblem<T>, x: Vec2<T>) -> FormCoeffs<T> {
    FormCoeffs { a: prob.a.value(x), b: prob.advection(x), c: prob.c.value(x) }
}

/// Assembled state operator with its preconditioner, shared by every solve
/// on the same mesh.
#[derive(Debug)]
pub struct StateOperator<T> {
    matrix: CsrMatrix<T>,
    transpose: Option<CsrMatrix<T>>,
    pre: Preconditioner<T>,
    opts: KrylovOptions,
}

impl<T: Real> StateOperator<T> {
    pub fn assemble(prob: &EllipticProblem<T>, mesh: &MappedMesh<T>, opts: KrylovOptions) -> Self {
        let matrix = assembly::assemble_matrix(mesh, &Rule::order2(), |_, _, x| state_coeffs(prob, x));
        Self::from_matrix(matrix, prob.is_symmetric(), opts)
    }

    pub fn from_matrix(matrix: CsrMatrix<T>, symmetric: bool, opts: KrylovOptions) -> Self {
        if symmetric {
            let pre = Preconditioner::for_symmetric(&matrix);
            Self { matrix, transpose: None, pre, opts }
        } else {
            let pre = Preconditioner::for_symmetric(&matrix.symmetric_part());
            let transpose = Some(matrix.transpose());
            Self { matrix, transpose, pre, opts }
        }
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.transpose.is_none()
    }

    pub fn options(&self) -> &KrylovOptions {
        &self.opts
    }

    /// Solves `A x = rhs` on the unknowns.
    pub fn solve(&self, rhs: &[T]) -> Result<(Vec<T>, SolveStats)> {
        match &self.transpose {
            None => pcg(&self.matrix, rhs, None, &self.pre, &self.opts),
            Some(_) => bicgstab(&self.matrix, rhs, None, &self.pre, &self.opts),
        }
    }

    /// Solves `Aᵀ x = rhs`.
    pub fn solve_transpose(&self, rhs: &[T]) -> Result<(Vec<T>, SolveStats)> {
        match &self.transpose {
            None => pcg(&self.matrix, rhs, None, &self.pre, &self.opts),
            Some(at) => bicgstab(at, rhs, None, &self.pre, &self.opts),
        }
    }

    /// `‖rhs − A x‖ / ‖rhs‖`, or `‖A x‖` when `rhs = 0`.
    pub fn relative_residual(&self, x: &[T], rhs: &[T]) -> f64 {
        let ax = self.matrix.mul_vec(x);
        let r: Vec<T> = rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
        let bn = linalg::norm2(rhs);
        let rn = linalg::norm2(&r);
        if bn > T::zero() { rn / bn } else { rn }.to_f64_lossy()
    }
}

/// Discrete state with its energy, and material derivatives once computed.
#[derive(Clone, Debug)]
pub struct StateBundle<T> {
    pub mesh: Arc<MappedMesh<T>>,
    /// Nodal `U₀`, zero at boundary nodes.
    pub u: Vec<T>,
    /// Relative residual of the linear solve.
    pub residual: f64,
    pub stats: SolveStats,
    pub energy: T,
    pub md1: Option<Vec<T>>,
    pub md2: Option<Vec<T>>,
    pub operator: Arc<StateOperator<T>>,
}

/// Solves the state equation on `Ω_u`.
pub fn solve_state<T: Real>(
    prob: &EllipticProblem<T>,
    u: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    opts: &KrylovOptions,
) -> Result<StateBundle<T>> {
    prob.check(T::one() / u.min())?;
    solve_on(prob, Arc::new(mesh.map(u)?), opts)
}

/// Solves the state equation on an already mapped mesh.
pub fn solve_on<T: Real>(
    prob: &EllipticProblem<T>,
    mesh: Arc<MappedMesh<T>>,
    opts: &KrylovOptions,
) -> Result<StateBundle<T>> {
    let operator = Arc::new(StateOperator::assemble(prob, &mesh, *opts));
    let load = assembly::assemble_load(&mesh, &Rule::order4(), |_, _, x| prob.f.value(x));
    let rhs = assembly::restrict(&mesh, &load);
    let (x, stats) = operator.solve(&rhs)?;
    let residual = operator.relative_residual(&x, &rhs);
    let u = assembly::extend(&mesh, &x);
    let energy = integrate_k(&prob.k, &mesh, &u);
    Ok(StateBundle { mesh, u, residual, stats, energy, md1: None, md2: None, operator })
}

/// `∫ K(x, w, ∇w)` over the mesh with the order-4 rule.
pub fn integrate_k<T: Real>(k: &Integrand<T>, mesh: &MappedMesh<T>, w: &[T]) -> T {
    let rule = Rule::order4();
    assembly::integrate(mesh, &rule, |e, q, x| {
        let (v, g) = assembly::p1_eval(mesh, e, &rule.points[q], w);
        k.eval(x, v, g)
    })
}

impl<T: Real> StateBundle<T> {
    /// Recomputes the energy integral of `prob.k` for the stored state.
    pub fn integrate_k(&self, prob: &EllipticProblem<T>) -> T {
        integrate_k(&prob.k, &self.mesh, &self.u)
    }

    /// Nodal value at the node nearest to `x`.
    pub fn value_near(&self, x: Vec2<T>) -> T {
        let k = self
            .mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, p)| (k, (*p - x).norm()))
            .fold((0, T::infinity()), |a, b| if b.1 < a.1 { b } else { a })
            .0;
        self.u[k]
    }
}

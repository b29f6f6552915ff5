//! Element loops for P1 forms and functionals. Element contributions are
//! computed in parallel and gathered in element order, so results do not
//! depend on the thread count.

use rayon::prelude::*;

use super::mesh::{MappedMesh, NOT_A_DOF};
use super::quadrature::Rule;
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::small::{Mat2, Vec2};
use crate::Real;

/// Pointwise coefficients of `∫ a∇w·∇φ + (b·∇w + c w) φ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FormCoeffs<T> {
    pub a: Mat2<T>,
    pub b: Vec2<T>,
    pub c: T,
}

impl<T: Real> FormCoeffs<T> {
    pub fn scale(self, s: T) -> Self {
        Self { a: self.a.scale(s), b: self.b.scale(s), c: self.c * s }
    }
}

impl<T: Real> std::ops::Add for FormCoeffs<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c }
    }
}

fn local_matrix<T: Real>(
    mesh: &MappedMesh<T>,
    rule: &Rule<T>,
    e: usize,
    coeffs: &(impl Fn(usize, usize, Vec2<T>) -> FormCoeffs<T> + Sync),
) -> [[T; 3]; 3] {
    let el = mesh.elements()[e];
    let mut m = [[T::zero(); 3]; 3];
    for (q, (lam, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let x = mesh.point(e, lam);
        let k = coeffs(e, q, x);
        let wa = w * el.area;
        for i in 0..3 {
            for j in 0..3 {
                let diff = k.a.bilinear(el.grads[i], el.grads[j]);
                let adv = k.b.dot(el.grads[j]) * lam[i];
                let rea = k.c * lam[i] * lam[j];
                m[i][j] += wa * (diff + adv + rea);
            }
        }
    }
    m
}

/// Matrix of the form on the interior unknowns; row `i` is the test function.
pub fn assemble_matrix<T: Real>(
    mesh: &MappedMesh<T>,
    rule: &Rule<T>,
    coeffs: impl Fn(usize, usize, Vec2<T>) -> FormCoeffs<T> + Sync,
) -> CsrMatrix<T> {
    let base = mesh.base();
    let locals: Vec<[[T; 3]; 3]> =
        (0..mesh.elements().len()).into_par_iter().map(|e| local_matrix(mesh, rule, e, &coeffs)).collect();
    let mut tb = TripletBuilder::with_capacity(base.n_dofs(), 9 * locals.len());
    for (t, m) in mesh.triangles().iter().zip(&locals) {
        for i in 0..3 {
            let di = base.dof(t[i]);
            if di == NOT_A_DOF {
                continue;
            }
            for j in 0..3 {
                let dj = base.dof(t[j]);
                if dj != NOT_A_DOF {
                    tb.push(di, dj, m[i][j]);
                }
            }
        }
    }
    tb.build()
}

/// Nodal vector `r_i = ∫ a∇w·∇φ_i + (b·∇w + c w) φ_i` for nodal `w`.
pub fn apply_form<T: Real>(
    mesh: &MappedMesh<T>,
    rule: &Rule<T>,
    coeffs: impl Fn(usize, usize, Vec2<T>) -> FormCoeffs<T> + Sync,
    w: &[T],
) -> Vec<T> {
    let locals: Vec<[T; 3]> = (0..mesh.elements().len())
        .into_par_iter()
        .map(|e| {
            let t = mesh.triangles()[e];
            let m = local_matrix(mesh, rule, e, &coeffs);
            let mut r = [T::zero(); 3];
            for i in 0..3 {
                for j in 0..3 {
                    r[i] += m[i][j] * w[t[j]];
                }
            }
            r
        })
        .collect();
    scatter(mesh, &locals)
}

/// Nodal vector `r_i = ∫ s φ_i + g·∇φ_i` where `(s, g)` is supplied per
/// quadrature point.
pub fn assemble_functional<T: Real>(
    mesh: &MappedMesh<T>,
    rule: &Rule<T>,
    integrand: impl Fn(usize, usize, Vec2<T>) -> (T, Vec2<T>) + Sync,
) -> Vec<T> {
    let locals: Vec<[T; 3]> = (0..mesh.elements().len())
        .into_par_iter()
        .map(|e| {
            let el = mesh.elements()[e];
            let mut r = [T::zero(); 3];
            for (q, (lam, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let (s, g) = integrand(e, q, mesh.point(e, lam));
                let wa = w * el.area;
                for i in 0..3 {
                    r[i] += wa * (s * lam[i] + g.dot(el.grads[i]));
                }
            }
            r
        })
        .collect();
    scatter(mesh, &locals)
}

/// Load vector `∫ f φ_i`.
pub fn assemble_load<T: Real>(
    mesh: &MappedMesh<T>,
    rule: &Rule<T>,
    f: impl Fn(usize, usize, Vec2<T>) -> T + Sync,
) -> Vec<T> {
    assemble_functional(mesh, rule, |e, q, x| (f(e, q, x), Vec2::zero()))
}

/// `∫ g` with `g` supplied per quadrature point, reduced in element order.
pub fn integrate<T: Real>(
    mesh: &MappedMesh<T>,
    rule: &Rule<T>,
    g: impl Fn(usize, usize, Vec2<T>) -> T + Sync,
) -> T {
    let parts: Vec<T> = (0..mesh.elements().len())
        .into_par_iter()
        .map(|e| {
            let el = mesh.elements()[e];
            rule.points
                .iter()
                .zip(&rule.weights)
                .enumerate()
                .map(|(q, (lam, &w))| w * g(e, q, mesh.point(e, lam)))
                .sum::<T>()
                * el.area
        })
        .collect();
    parts.into_iter().sum()
}

fn scatter<T: Real>(mesh: &MappedMesh<T>, locals: &[[T; 3]]) -> Vec<T> {
    let mut out = vec![T::zero(); mesh.nodes().len()];
    for (t, r) in mesh.triangles().iter().zip(locals) {
        for i in 0..3 {
            out[t[i]] += r[i];
        }
    }
    out
}

/// Values of a nodal vector at the unknowns.
pub fn restrict<T: Real>(mesh: &MappedMesh<T>, nodal: &[T]) -> Vec<T> {
    let base = mesh.base();
    let mut out = vec![T::zero(); base.n_dofs()];
    for (k, &v) in nodal.iter().enumerate() {
        let d = base.dof(k);
        if d != NOT_A_DOF {
            out[d] = v;
        }
    }
    out
}

/// Nodal vector from unknowns, zero on the boundary.
pub fn extend<T: Real>(mesh: &MappedMesh<T>, dofs: &[T]) -> Vec<T> {
    let base = mesh.base();
    (0..base.n_nodes())
        .map(|k| {
            let d = base.dof(k);
            if d == NOT_A_DOF {
                T::zero()
            } else {
                dofs[d]
            }
        })
        .collect()
}

/// Value and gradient of a P1 function at barycentric point `lam` of element `e`.
pub fn p1_eval<T: Real>(mesh: &MappedMesh<T>, e: usize, lam: &[T; 3], w: &[T]) -> (T, Vec2<T>) {
    let t = mesh.triangles()[e];
    let el = mesh.elements()[e];
    let mut v = T::zero();
    let mut g = Vec2::zero();
    for i in 0..3 {
        v += lam[i] * w[t[i]];
        g += el.grads[i].scale(w[t[i]]);
    }
    (v, g)
}

//! Sparse storage and solvers used by the finite-element and projection code.

mod csr;
mod krylov;
mod skyline;

pub use csr::{CsrMatrix, TripletBuilder};
pub use krylov::{bicgstab, pcg, IncompleteCholesky, KrylovOptions, Preconditioner, SolveStats};
pub use skyline::SkylineMatrix;

use crate::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

//! State equation `−∇·(a∇U) + b·∇U + cU = f` in `Ω`, `U = 0` on `∂Ω`, and the
//! energy integrand `K(x, U, q) = ½(α q·q + α₀₀U²) + β·q + γU + δ`.

use std::sync::Arc;

use super::field::{self, constant, scaled, Field, SymMatField, VecField};
use crate::error::{Error, Result};
use crate::small::Vec2;
use crate::Real;

#[derive(Clone, Debug)]
pub struct Integrand<T> {
    pub alpha: SymMatField<T>,
    pub alpha00: Field<T>,
    pub beta: VecField<T>,
    pub gamma: Field<T>,
    pub delta: Field<T>,
}

impl<T: Real> Integrand<T> {
    /// `½|∇U|² − fU`.
    pub fn dirichlet_energy(f: Field<T>) -> Self {
        Self {
            alpha: SymMatField::identity(),
            alpha00: field::zero(),
            beta: VecField::zero(),
            gamma: scaled(-T::one(), f),
            delta: field::zero(),
        }
    }

    /// `½(a∇U·∇U + cU²) − fU`, the energy whose minimizer solves a
    /// self-adjoint state equation.
    pub fn energy_of(a: SymMatField<T>, c: Field<T>, f: Field<T>) -> Self {
        Self { alpha: a, alpha00: c, beta: VecField::zero(), gamma: scaled(-T::one(), f), delta: field::zero() }
    }

    /// `K ≡ 1`, so that the energy is the area.
    pub fn area() -> Self {
        Self {
            alpha: SymMatField::zero(),
            alpha00: field::zero(),
            beta: VecField::zero(),
            gamma: field::zero(),
            delta: constant(T::one()),
        }
    }

    /// Value of `K` at `x` for state value `w` and gradient `q`.
    pub fn eval(&self, x: Vec2<T>, w: T, q: Vec2<T>) -> T {
        let half = T::lit(0.5);
        half * (self.alpha.value(x).bilinear(q, q) + self.alpha00.value(x) * w * w)
            + self.beta.value(x).dot(q)
            + self.gamma.value(x) * w
            + self.delta.value(x)
    }

    /// `(∂_U K, ∂_q K)` at `x`.
    pub fn partials(&self, x: Vec2<T>, w: T, q: Vec2<T>) -> (T, Vec2<T>) {
        let du = self.alpha00.value(x) * w + self.gamma.value(x);
        let dq = self.alpha.value(x).mul_vec(q) + self.beta.value(x);
        (du, dq)
    }

    /// `true` when `K` does not involve the state.
    pub fn is_geometric(&self) -> bool {
        self.alpha.is_zero() && self.alpha00.is_zero() && self.beta.is_zero() && self.gamma.is_zero()
    }
}

/// Coefficients of the state equation and of the energy integrand.
#[derive(Clone, Debug)]
pub struct EllipticProblem<T> {
    pub name: String,
    pub a: SymMatField<T>,
    /// `None` for a self-adjoint operator.
    pub b: Option<VecField<T>>,
    pub c: Field<T>,
    pub f: Field<T>,
    pub k: Integrand<T>,
}

/// Sampled ellipticity data.
#[derive(Clone, Copy, Debug)]
pub struct Ellipticity<T> {
    /// Largest `λ` with `λ|ξ|² ≤ aξ·ξ ≤ λ⁻¹|ξ|²` on the probe grid.
    pub lambda: T,
    pub min_eigenvalue: T,
    pub max_eigenvalue: T,
    pub min_c: T,
}

impl<T: Real> EllipticProblem<T> {
    /// `−ΔU = f` with the Dirichlet energy `½|∇U|² − fU`.
    pub fn dirichlet(f: Field<T>) -> Self {
        Self {
            name: "dirichlet".into(),
            a: SymMatField::identity(),
            b: None,
            c: field::zero(),
            k: Integrand::dirichlet_energy(f.clone()),
            f,
        }
    }

    /// `−ΔU = 1`.
    pub fn unit_source() -> Self {
        Self::dirichlet(constant(T::one())).named("unit-source")
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_reaction(mut self, c: Field<T>) -> Self {
        self.c = c;
        self
    }

    pub fn with_advection(mut self, b: VecField<T>) -> Self {
        self.b = if b.is_zero() { None } else { Some(b) };
        self
    }

    pub fn with_integrand(mut self, k: Integrand<T>) -> Self {
        self.k = k;
        self
    }

    /// Replaces the integrand by the energy associated with the (self-adjoint
    /// part of the) current operator and source.
    pub fn with_associated_energy(mut self) -> Self {
        self.k = Integrand::energy_of(self.a.clone(), self.c.clone(), self.f.clone());
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.b.is_none()
    }

    pub fn advection(&self, x: Vec2<T>) -> Vec2<T> {
        self.b.as_ref().map_or(Vec2::zero(), |b| b.value(x))
    }

    /// Samples `a` and `c` on a polar grid of the disk of radius `radius`.
    pub fn check(&self, radius: T) -> Result<Ellipticity<T>> {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        let mut cmin = T::infinity();
        let rings = 16;
        let spokes = 64;
        for i in 0..=rings {
            let r = radius * T::from_usize_lossy(i) / T::from_usize_lossy(rings);
            let m = if i == 0 { 1 } else { spokes };
            for j in 0..m {
                let th = T::two_pi() * T::from_usize_lossy(j) / T::from_usize_lossy(m);
                let x = Vec2::polar_unit(th).scale(r);
                let a = self.a.value(x);
                let (l0, l1) = a.sym_eigenvalues();
                let c = self.c.value(x);
                if !(l0.is_finite() && l1.is_finite() && c.is_finite()) {
                    return Err(Error::Ellipticity(format!("non-finite coefficient at ({}, {})", x.x, x.y)));
                }
                lo = lo.min(l0.min(l1));
                hi = hi.max(l0.max(l1));
                cmin = cmin.min(c);
            }
        }
        if !(lo > T::zero()) {
            return Err(Error::Ellipticity(format!("smallest eigenvalue of a is {lo}")));
        }
        if cmin < T::zero() {
            return Err(Error::Ellipticity(format!("reaction coefficient c reaches {cmin} < 0")));
        }
        Ok(Ellipticity { lambda: lo.min(T::one() / hi), min_eigenvalue: lo, max_eigenvalue: hi, min_c: cmin })
    }

    /// Fails with [`Error::MissingDerivative`] when some coefficient lacks a
    /// Hessian at `x`.
    pub fn require_second_derivatives(&self, x: Vec2<T>) -> Result<()> {
        if !field::sym_has_hessian(&self.a, x) {
            return Err(Error::MissingDerivative("a"));
        }
        if let Some(b) = &self.b {
            if !field::vec_has_hessian(b, x) {
                return Err(Error::MissingDerivative("b"));
            }
        }
        let scalars: [(&'static str, &Field<T>); 5] = [
            ("c", &self.c),
            ("f", &self.f),
            ("alpha00", &self.k.alpha00),
            ("gamma", &self.k.gamma),
            ("delta", &self.k.delta),
        ];
        for (name, g) in scalars {
            if g.hess(x).is_none() {
                return Err(Error::MissingDerivative(name));
            }
        }
        if !field::sym_has_hessian(&self.k.alpha, x) {
            return Err(Error::MissingDerivative("alpha"));
        }
        if !field::vec_has_hessian(&self.k.beta, x) {
            return Err(Error::MissingDerivative("beta"));
        }
        Ok(())
    }
}

/// Shared handle.
pub type Problem<T> = Arc<EllipticProblem<T>>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::field::{FnField, Polynomial};

    #[test]
    fn ellipticity_is_reported() {
        let p = EllipticProblem::<f64>::unit_source();
        let e = p.check(1.0).unwrap();
        assert_eq!(e.lambda, 1.0);
        let aniso = SymMatField::new(constant(2.0), constant(0.0), constant(0.5));
        let mut q = EllipticProblem::<f64>::unit_source();
        q.a = aniso;
        assert!((q.check(1.0).unwrap().lambda - 0.5).abs() < 1e-15);
        q.a = SymMatField::new(constant(1.0), constant(2.0), constant(1.0));
        assert!(matches!(q.check(1.0), Err(Error::Ellipticity(_))));
        let r = EllipticProblem::<f64>::unit_source().with_reaction(Arc::new(Polynomial::new(vec![(1, 0, 1.0)])));
        assert!(matches!(r.check(1.0), Err(Error::Ellipticity(_))));
    }

    #[test]
    fn integrand_values() {
        let k = Integrand::<f64>::dirichlet_energy(constant(2.0));
        let x = Vec2::new(0.1, 0.2);
        let v = k.eval(x, 0.5, Vec2::new(1.0, 2.0));
        assert!((v - (2.5 - 1.0)).abs() < 1e-15);
        let (du, dq) = k.partials(x, 0.5, Vec2::new(1.0, 2.0));
        assert_eq!(du, -2.0);
        assert_eq!(dq, Vec2::new(1.0, 2.0));
        assert!(Integrand::<f64>::area().is_geometric());
    }

    #[test]
    fn missing_hessians_are_named() {
        let g = FnField::new("g", |x: Vec2<f64>| x.x, |_| Vec2::new(1.0, 0.0));
        let p = EllipticProblem::dirichlet(Arc::new(g));
        assert!(matches!(p.require_second_derivatives(Vec2::zero()), Err(Error::MissingDerivative("f"))));
        assert!(EllipticProblem::<f64>::unit_source().require_second_derivatives(Vec2::zero()).is_ok());
    }
}

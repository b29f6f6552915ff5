//! Coefficient fields on the plane with analytic first and second derivatives.

use std::fmt;
use std::sync::Arc;

use crate::small::{Mat2, Vec2};
use crate::Real;

/// A scalar field `g(x)` with its gradient and (optionally) its Hessian.
pub trait ScalarField<T>: Send + Sync + fmt::Debug {
    fn value(&self, x: Vec2<T>) -> T;
    fn grad(&self, x: Vec2<T>) -> Vec2<T>;
    /// `None` when second derivatives were not supplied.
    fn hess(&self, x: Vec2<T>) -> Option<Mat2<T>>;
    /// Identically zero; lets callers skip work.
    fn is_zero(&self) -> bool {
        false
    }
    /// Spatially constant; derivatives may be skipped.
    fn is_constant(&self) -> bool {
        self.is_zero()
    }
}

pub type Field<T> = Arc<dyn ScalarField<T>>;

#[derive(Clone, Copy, Debug)]
pub struct Constant<T>(pub T);

impl<T: Real> ScalarField<T> for Constant<T> {
    fn value(&self, _: Vec2<T>) -> T {
        self.0
    }
    fn grad(&self, _: Vec2<T>) -> Vec2<T> {
        Vec2::zero()
    }
    fn hess(&self, _: Vec2<T>) -> Option<Mat2<T>> {
        Some(Mat2::zero())
    }
    fn is_zero(&self) -> bool {
        self.0 == T::zero()
    }
    fn is_constant(&self) -> bool {
        true
    }
}

pub fn constant<T: Real>(c: T) -> Field<T> {
    Arc::new(Constant(c))
}

pub fn zero<T: Real>() -> Field<T> {
    constant(T::zero())
}

/// `Σ c · x^i y^j`.
#[derive(Clone, Debug)]
pub struct Polynomial<T> {
    terms: Vec<(u32, u32, T)>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(terms: Vec<(u32, u32, T)>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[(u32, u32, T)] {
        &self.terms
    }
}

fn mono<T: Real>(x: T, p: i64) -> T {
    if p < 0 {
        T::zero()
    } else {
        x.powi(p as i32)
    }
}

impl<T: Real> ScalarField<T> for Polynomial<T> {
    fn value(&self, x: Vec2<T>) -> T {
        self.terms.iter().map(|&(i, j, c)| c * mono(x.x, i.into()) * mono(x.y, j.into())).sum()
    }

    fn grad(&self, x: Vec2<T>) -> Vec2<T> {
        let mut g = Vec2::zero();
        for &(i, j, c) in &self.terms {
            let (i, j) = (i64::from(i), i64::from(j));
            let fi = T::from_i64(i).unwrap();
            let fj = T::from_i64(j).unwrap();
            g.x += c * fi * mono(x.x, i - 1) * mono(x.y, j);
            g.y += c * fj * mono(x.x, i) * mono(x.y, j - 1);
        }
        g
    }

    fn hess(&self, x: Vec2<T>) -> Option<Mat2<T>> {
        let (mut xx, mut xy, mut yy) = (T::zero(), T::zero(), T::zero());
        for &(i, j, c) in &self.terms {
            let (i, j) = (i64::from(i), i64::from(j));
            let fi = T::from_i64(i).unwrap();
            let fj = T::from_i64(j).unwrap();
            xx += c * fi * (fi - T::one()) * mono(x.x, i - 2) * mono(x.y, j);
            xy += c * fi * fj * mono(x.x, i - 1) * mono(x.y, j - 1);
            yy += c * fj * (fj - T::one()) * mono(x.x, i) * mono(x.y, j - 2);
        }
        Some(Mat2::sym(xx, xy, yy))
    }

    fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.2 == T::zero())
    }
    fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.2 == T::zero() || (t.0 == 0 && t.1 == 0))
    }
}

/// `A (1 − |x − x₀|²/R²)³` inside the disk of radius `R`, zero outside; C².
#[derive(Clone, Copy, Debug)]
pub struct RadialBump<T> {
    pub amplitude: T,
    pub radius: T,
    pub center: Vec2<T>,
}

impl<T: Real> RadialBump<T> {
    pub fn centered(amplitude: T, radius: T) -> Self {
        Self { amplitude, radius, center: Vec2::zero() }
    }

    /// `∫ g` over the plane, `π A R² / 4`.
    pub fn integral(&self) -> T {
        T::PI() * self.amplitude * self.radius * self.radius / T::lit(4.0)
    }

    fn s(&self, x: Vec2<T>) -> (Vec2<T>, T) {
        let d = x - self.center;
        (d, d.dot(d) / (self.radius * self.radius))
    }
}

impl<T: Real> ScalarField<T> for RadialBump<T> {
    fn value(&self, x: Vec2<T>) -> T {
        let (_, s) = self.s(x);
        if s >= T::one() {
            return T::zero();
        }
        let w = T::one() - s;
        self.amplitude * w * w * w
    }

    fn grad(&self, x: Vec2<T>) -> Vec2<T> {
        let (d, s) = self.s(x);
        if s >= T::one() {
            return Vec2::zero();
        }
        let w = T::one() - s;
        let r2 = self.radius * self.radius;
        d.scale(-T::lit(6.0) * self.amplitude * w * w / r2)
    }

    fn hess(&self, x: Vec2<T>) -> Option<Mat2<T>> {
        let (d, s) = self.s(x);
        if s >= T::one() {
            return Some(Mat2::zero());
        }
        let w = T::one() - s;
        let r2 = self.radius * self.radius;
        let outer = d.outer(d).scale(T::lit(24.0) * self.amplitude * w / (r2 * r2));
        Some(outer - Mat2::identity().scale(T::lit(6.0) * self.amplitude * w * w / r2))
    }

    fn is_zero(&self) -> bool {
        self.amplitude == T::zero()
    }
}

/// `s · g`.
#[derive(Clone, Debug)]
pub struct Scaled<T> {
    pub factor: T,
    pub inner: Field<T>,
}

impl<T: Real> ScalarField<T> for Scaled<T> {
    fn value(&self, x: Vec2<T>) -> T {
        self.factor * self.inner.value(x)
    }
    fn grad(&self, x: Vec2<T>) -> Vec2<T> {
        self.inner.grad(x).scale(self.factor)
    }
    fn hess(&self, x: Vec2<T>) -> Option<Mat2<T>> {
        self.inner.hess(x).map(|h| h.scale(self.factor))
    }
    fn is_zero(&self) -> bool {
        self.factor == T::zero() || self.inner.is_zero()
    }
    fn is_constant(&self) -> bool {
        self.factor == T::zero() || self.inner.is_constant()
    }
}

pub fn scaled<T: Real>(factor: T, inner: Field<T>) -> Field<T> {
    Arc::new(Scaled { factor, inner })
}

type ValueFn<T> = Box<dyn Fn(Vec2<T>) -> T + Send + Sync>;
type GradFn<T> = Box<dyn Fn(Vec2<T>) -> Vec2<T> + Send + Sync>;
type HessFn<T> = Box<dyn Fn(Vec2<T>) -> Mat2<T> + Send + Sync>;

/// Field given by closures.
pub struct FnField<T> {
    name: String,
    value: ValueFn<T>,
    grad: GradFn<T>,
    hess: Option<HessFn<T>>,
}

impl<T> FnField<T> {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(Vec2<T>) -> T + Send + Sync + 'static,
        grad: impl Fn(Vec2<T>) -> Vec2<T> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), value: Box::new(value), grad: Box::new(grad), hess: None }
    }

    pub fn with_hessian(mut self, hess: impl Fn(Vec2<T>) -> Mat2<T> + Send + Sync + 'static) -> Self {
        self.hess = Some(Box::new(hess));
        self
    }
}

impl<T> fmt::Debug for FnField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("name", &self.name).field("hessian", &self.hess.is_some()).finish()
    }
}

impl<T: Real> ScalarField<T> for FnField<T> {
    fn value(&self, x: Vec2<T>) -> T {
        (self.value)(x)
    }
    fn grad(&self, x: Vec2<T>) -> Vec2<T> {
        (self.grad)(x)
    }
    fn hess(&self, x: Vec2<T>) -> Option<Mat2<T>> {
        self.hess.as_ref().map(|h| h(x))
    }
}

/// Symmetric 2×2 field stored by its three independent entries.
#[derive(Clone, Debug)]
pub struct SymMatField<T> {
    pub xx: Field<T>,
    pub xy: Field<T>,
    pub yy: Field<T>,
}

impl<T: Real> SymMatField<T> {
    pub fn new(xx: Field<T>, xy: Field<T>, yy: Field<T>) -> Self {
        Self { xx, xy, yy }
    }

    pub fn identity() -> Self {
        Self::scalar(constant(T::one()))
    }

    pub fn zero() -> Self {
        Self::scalar(zero())
    }

    /// `g(x) I`.
    pub fn scalar(g: Field<T>) -> Self {
        Self { xx: g.clone(), xy: zero(), yy: g }
    }

    pub fn value(&self, x: Vec2<T>) -> Mat2<T> {
        Mat2::sym(self.xx.value(x), self.xy.value(x), self.yy.value(x))
    }

    /// Directional derivative `∇A(x)·d`, entrywise.
    pub fn d1(&self, x: Vec2<T>, d: Vec2<T>) -> Mat2<T> {
        Mat2::sym(self.xx.grad(x).dot(d), self.xy.grad(x).dot(d), self.yy.grad(x).dot(d))
    }

    /// Second directional derivative `dᵀ H d`, entrywise.
    pub fn d2(&self, x: Vec2<T>, d: Vec2<T>) -> Option<Mat2<T>> {
        Some(Mat2::sym(
            self.xx.hess(x)?.bilinear(d, d),
            self.xy.hess(x)?.bilinear(d, d),
            self.yy.hess(x)?.bilinear(d, d),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.xx.is_zero() && self.xy.is_zero() && self.yy.is_zero()
    }

    fn has_hessian(&self, x: Vec2<T>) -> bool {
        self.xx.hess(x).is_some() && self.xy.hess(x).is_some() && self.yy.hess(x).is_some()
    }
}

#[derive(Clone, Debug)]
pub struct VecField<T> {
    pub x: Field<T>,
    pub y: Field<T>,
}

impl<T: Real> VecField<T> {
    pub fn new(x: Field<T>, y: Field<T>) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self { x: zero(), y: zero() }
    }

    pub fn value(&self, p: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.x.value(p), self.y.value(p))
    }

    pub fn d1(&self, p: Vec2<T>, d: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.x.grad(p).dot(d), self.y.grad(p).dot(d))
    }

    pub fn d2(&self, p: Vec2<T>, d: Vec2<T>) -> Option<Vec2<T>> {
        Some(Vec2::new(self.x.hess(p)?.bilinear(d, d), self.y.hess(p)?.bilinear(d, d)))
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    fn has_hessian(&self, p: Vec2<T>) -> bool {
        self.x.hess(p).is_some() && self.y.hess(p).is_some()
    }
}

/// Scalar jets along `t ↦ g(x + t d)`.
pub fn scalar_d1<T: Real>(g: &dyn ScalarField<T>, x: Vec2<T>, d: Vec2<T>) -> T {
    g.grad(x).dot(d)
}

pub fn scalar_d2<T: Real>(g: &dyn ScalarField<T>, x: Vec2<T>, d: Vec2<T>) -> Option<T> {
    g.hess(x).map(|h| h.bilinear(d, d))
}

pub(crate) fn sym_has_hessian<T: Real>(m: &SymMatField<T>, x: Vec2<T>) -> bool {
    m.has_hessian(x)
}

pub(crate) fn vec_has_hessian<T: Real>(v: &VecField<T>, x: Vec2<T>) -> bool {
    v.has_hessian(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(g: &dyn ScalarField<f64>, x: Vec2<f64>) {
        let h = 1e-5;
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        let gx = (g.value(x + ex) - g.value(x - ex)) / (2.0 * h);
        let gy = (g.value(x + ey) - g.value(x - ey)) / (2.0 * h);
        let gr = g.grad(x);
        assert!((gx - gr.x).abs() < 1e-7 && (gy - gr.y).abs() < 1e-7);
        let hs = g.hess(x).unwrap();
        let hxx = (g.grad(x + ex).x - g.grad(x - ex).x) / (2.0 * h);
        let hxy = (g.grad(x + ey).x - g.grad(x - ey).x) / (2.0 * h);
        let hyy = (g.grad(x + ey).y - g.grad(x - ey).y) / (2.0 * h);
        assert!((hxx - hs.xx).abs() < 1e-6 && (hxy - hs.xy).abs() < 1e-6 && (hyy - hs.yy).abs() < 1e-6);
        assert!((hs.xy - hs.yx).abs() < 1e-14);
    }

    #[test]
    fn polynomial_derivatives() {
        let p = Polynomial::new(vec![(0, 0, 1.5), (2, 1, -0.7), (0, 3, 0.4), (1, 1, 2.0)]);
        fd_check(&p, Vec2::new(0.3, -0.6));
        assert!((p.value(Vec2::new(1.0, 2.0)) - (1.5 - 1.4 + 3.2 + 4.0)).abs() < 1e-14);
    }

    #[test]
    fn bump_derivatives_and_support() {
        let b = RadialBump::centered(1.0, 0.5);
        fd_check(&b, Vec2::new(0.1, 0.2));
        assert_eq!(b.value(Vec2::new(0.5, 0.0)), 0.0);
        assert_eq!(b.value(Vec2::zero()), 1.0);
        assert!((b.integral() - std::f64::consts::PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn closures_without_hessian() {
        let g = FnField::new("sin", |x: Vec2<f64>| x.x.sin(), |x| Vec2::new(x.x.cos(), 0.0));
        assert!(g.hess(Vec2::zero()).is_none());
        let g = g.with_hessian(|x| Mat2::sym(-x.x.sin(), 0.0, 0.0));
        fd_check(&g, Vec2::new(0.4, 0.1));
    }
}

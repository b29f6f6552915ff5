//! Transported coefficients and their first two derivatives along `θ = tξ`.
//!
//! Conventions: `G = ∇ξ` with `G_ij = ∂_j ξ_i`, `T = (I + tG)⁻¹`,
//! `J = det(I + tG)`. Then
//! `â = J T a∘(I+tξ) Tᵀ`, `b̂ = J T b∘(I+tξ)`, `ĉ = J c∘(I+tξ)`,
//! `f̂ = J f∘(I+tξ)`, and the integrand transports the same way
//! (`α̂` like `â`, `β̂` like `b̂`, the scalars like `ĉ`).
//! At `t = 0`: `T' = −G`, `T'' = 2G²`, `J' = tr G`, `J'' = 2 det G`,
//! `(g∘(I+tξ))' = ∇g·ξ`, `(g∘(I+tξ))'' = ξᵀ∇²g ξ`.

use std::ops::Add;

use crate::error::{Error, Result};
use crate::fem::field::{ScalarField, SymMatField, VecField};
use crate::fem::EllipticProblem;
use crate::small::{Mat2, Vec2};
use crate::Real;

/// Value and first two derivatives at `t = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet<S> {
    pub v: S,
    pub d1: S,
    pub d2: S,
}

fn prod<A: Copy, B: Copy, C: Add<Output = C>>(a: Jet<A>, b: Jet<B>, f: impl Fn(A, B) -> C) -> Jet<C> {
    Jet {
        v: f(a.v, b.v),
        d1: f(a.d1, b.v) + f(a.v, b.d1),
        d2: f(a.d2, b.v) + f(a.d1, b.d1) + f(a.d1, b.d1) + f(a.v, b.d2),
    }
}

/// Transported coefficients at one point, or one of their derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Coefficients<T> {
    pub a: Mat2<T>,
    pub b: Vec2<T>,
    pub c: T,
    pub f: T,
    pub alpha: Mat2<T>,
    pub alpha00: T,
    pub beta: Vec2<T>,
    pub gamma: T,
    pub delta: T,
}

impl<T: Real> Coefficients<T> {
    pub const NAMES: [&'static str; 17] = [
        "a_xx", "a_xy", "a_yx", "a_yy", "b_x", "b_y", "c", "f", "alpha_xx", "alpha_xy", "alpha_yx", "alpha_yy",
        "alpha00", "beta_x", "beta_y", "gamma", "delta",
    ];

    pub fn entries(&self) -> [T; 17] {
        [
            self.a.xx,
            self.a.xy,
            self.a.yx,
            self.a.yy,
            self.b.x,
            self.b.y,
            self.c,
            self.f,
            self.alpha.xx,
            self.alpha.xy,
            self.alpha.yx,
            self.alpha.yy,
            self.alpha00,
            self.beta.x,
            self.beta.y,
            self.gamma,
            self.delta,
        ]
    }
}

fn scalar_jet<T: Real>(g: &dyn ScalarField<T>, x: Vec2<T>, xi: Vec2<T>, order: u8) -> Result<Jet<T>> {
    let v = g.value(x);
    if g.is_constant() {
        return Ok(Jet { v, d1: T::zero(), d2: T::zero() });
    }
    let d1 = g.grad(x).dot(xi);
    let d2 = if order >= 2 { g.hess(x).ok_or(Error::MissingDerivative("field"))?.bilinear(xi, xi) } else { T::zero() };
    Ok(Jet { v, d1, d2 })
}

fn sym_jet<T: Real>(m: &SymMatField<T>, x: Vec2<T>, xi: Vec2<T>, order: u8) -> Result<Jet<Mat2<T>>> {
    let xx = scalar_jet(m.xx.as_ref(), x, xi, order)?;
    let xy = scalar_jet(m.xy.as_ref(), x, xi, order)?;
    let yy = scalar_jet(m.yy.as_ref(), x, xi, order)?;
    Ok(Jet {
        v: Mat2::sym(xx.v, xy.v, yy.v),
        d1: Mat2::sym(xx.d1, xy.d1, yy.d1),
        d2: Mat2::sym(xx.d2, xy.d2, yy.d2),
    })
}

fn vec_jet<T: Real>(b: &VecField<T>, x: Vec2<T>, xi: Vec2<T>, order: u8) -> Result<Jet<Vec2<T>>> {
    let bx = scalar_jet(b.x.as_ref(), x, xi, order)?;
    let by = scalar_jet(b.y.as_ref(), x, xi, order)?;
    Ok(Jet { v: Vec2::new(bx.v, by.v), d1: Vec2::new(bx.d1, by.d1), d2: Vec2::new(bx.d2, by.d2) })
}

/// Geometric jets `(J, T)` for `G = ∇ξ`.
fn geometric<T: Real>(g: Mat2<T>) -> (Jet<T>, Jet<Mat2<T>>) {
    let two = T::lit(2.0);
    let det = Jet { v: T::one(), d1: g.trace(), d2: two * g.det() };
    let t = Jet { v: Mat2::identity(), d1: -g, d2: (g * g).scale(two) };
    (det, t)
}

fn transpose<T: Real>(j: Jet<Mat2<T>>) -> Jet<Mat2<T>> {
    Jet { v: j.v.transpose(), d1: j.d1.transpose(), d2: j.d2.transpose() }
}

fn matrix_transport<T: Real>(det: Jet<T>, t: Jet<Mat2<T>>, m: Jet<Mat2<T>>) -> Jet<Mat2<T>> {
    let tm = prod(t, m, |p, q| p * q);
    let tmt = prod(tm, transpose(t), |p, q| p * q);
    prod(det, tmt, |s, p| p.scale(s))
}

fn vector_transport<T: Real>(det: Jet<T>, t: Jet<Mat2<T>>, b: Jet<Vec2<T>>) -> Jet<Vec2<T>> {
    let tb = prod(t, b, |p, q| p.mul_vec(q));
    prod(det, tb, |s, q| q.scale(s))
}

fn scalar_transport<T: Real>(det: Jet<T>, c: Jet<T>) -> Jet<T> {
    prod(det, c, |s, q| s * q)
}

/// Which coefficient groups to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    /// `â, b̂, ĉ`.
    Operator,
    /// `f̂` and the integrand.
    Load,
    All,
}

/// Jets of every transported coefficient at `x` for displacement value `xi`
/// and gradient `g`. `order` is 1 or 2; second derivatives are zero at order 1.
pub fn coefficient_jet<T: Real>(
    prob: &EllipticProblem<T>,
    x: Vec2<T>,
    xi: Vec2<T>,
    g: Mat2<T>,
    order: u8,
    group: Group,
) -> Result<[Coefficients<T>; 3]> {
    let (det, t) = geometric(g);
    let mut out = [Coefficients::default(); 3];
    let mut put = |set: &mut dyn FnMut(&mut Coefficients<T>, usize)| {
        for (k, c) in out.iter_mut().enumerate() {
            set(c, k);
        }
    };
    fn pick<S: Copy>(j: &Jet<S>, k: usize) -> S {
        [j.v, j.d1, j.d2][k]
    }
    if group != Group::Load {
        let a = matrix_transport(det, t, sym_jet(&prob.a, x, xi, order)?);
        let c = scalar_transport(det, scalar_jet(prob.c.as_ref(), x, xi, order)?);
        let b = match &prob.b {
            Some(b) => vector_transport(det, t, vec_jet(b, x, xi, order)?),
            None => Jet::default(),
        };
        put(&mut |co, k| {
            co.a = pick(&a, k);
            co.b = pick(&b, k);
            co.c = pick(&c, k);
        });
    }
    if group != Group::Operator {
        let k = &prob.k;
        let f = scalar_transport(det, scalar_jet(prob.f.as_ref(), x, xi, order)?);
        let alpha = matrix_transport(det, t, sym_jet(&k.alpha, x, xi, order)?);
        let alpha00 = scalar_transport(det, scalar_jet(k.alpha00.as_ref(), x, xi, order)?);
        let beta = vector_transport(det, t, vec_jet(&k.beta, x, xi, order)?);
        let gamma = scalar_transport(det, scalar_jet(k.gamma.as_ref(), x, xi, order)?);
        let delta = scalar_transport(det, scalar_jet(k.delta.as_ref(), x, xi, order)?);
        put(&mut |co, i| {
            co.f = pick(&f, i);
            co.alpha = pick(&alpha, i);
            co.alpha00 = pick(&alpha00, i);
            co.beta = pick(&beta, i);
            co.gamma = pick(&gamma, i);
            co.delta = pick(&delta, i);
        });
    }
    if order < 2 {
        out[2] = Coefficients::default();
    }
    Ok(out)
}

/// Transported coefficients at finite `t`, straight from the definitions.
pub fn transported<T: Real>(prob: &EllipticProblem<T>, x: Vec2<T>, xi: Vec2<T>, g: Mat2<T>, t: T) -> Result<Coefficients<T>> {
    let dphi = Mat2::identity() + g.scale(t);
    let det = dphi.det();
    let tm = dphi.inverse().ok_or_else(|| Error::DegenerateMesh("singular deformation gradient".into()))?;
    let y = x + xi.scale(t);
    let mt = |m: Mat2<T>| (tm * m * tm.transpose()).scale(det);
    let vt = |b: Vec2<T>| tm.mul_vec(b).scale(det);
    let k = &prob.k;
    Ok(Coefficients {
        a: mt(prob.a.value(y)),
        b: vt(prob.advection(y)),
        c: det * prob.c.value(y),
        f: det * prob.f.value(y),
        alpha: mt(k.alpha.value(y)),
        alpha00: det * k.alpha00.value(y),
        beta: vt(k.beta.value(y)),
        gamma: det * k.gamma.value(y),
        delta: det * k.delta.value(y),
    })
}

/// Largest mismatch between analytic jets and central differences at step `t`.
#[derive(Clone, Copy, Debug)]
pub struct JetCheck<T> {
    pub first: T,
    pub second: T,
    /// Index into [`Coefficients::NAMES`] of the worst entry.
    pub worst: usize,
}

/// Compares [`coefficient_jet`] against central differences of
/// [`transported`]. Errors are relative to `max(|jet|, |value|, 1)`.
pub fn check_jet<T: Real>(prob: &EllipticProblem<T>, x: Vec2<T>, xi: Vec2<T>, g: Mat2<T>, t: T) -> Result<JetCheck<T>> {
    let jet = coefficient_jet(prob, x, xi, g, 2, Group::All)?;
    let p = transported(prob, x, xi, g, t)?.entries();
    let z = transported(prob, x, xi, g, T::zero())?.entries();
    let m = transported(prob, x, xi, g, -t)?.entries();
    let (d0, d1, d2) = (jet[0].entries(), jet[1].entries(), jet[2].entries());
    let mut out = JetCheck { first: T::zero(), second: T::zero(), worst: 0 };
    for i in 0..d1.len() {
        let fd1 = (p[i] - m[i]) / (t + t);
        let fd2 = (p[i] - z[i] - z[i] + m[i]) / (t * t);
        let scale = d0[i].abs().max(T::one());
        let e1 = (fd1 - d1[i]).abs() / d1[i].abs().max(scale);
        let e2 = (fd2 - d2[i]).abs() / d2[i].abs().max(scale);
        if e1.max(e2) > out.first.max(out.second) {
            out.worst = i;
        }
        out.first = out.first.max(e1);
        out.second = out.second.max(e2);
    }
    Ok(out)
}

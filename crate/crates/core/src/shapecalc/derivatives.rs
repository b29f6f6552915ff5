//! Material derivatives of the state and derivatives of the energy along a
//! nodal displacement, all on the fixed mesh of `Ω₀`.
//!
//! With `a(w, φ) = ∫ a∇w·∇φ + (b·∇w + cw)φ` and primes denoting `d/dt` of the
//! transported data at `t = 0`:
//! `a(U', φ) = F'(φ) − a'(U, φ)` and
//! `a(U'', φ) = F''(φ) − a''(U, φ) − 2a'(U', φ)`.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use super::deformation::{w1inf_norm, DeformationField, Profile};
use super::jet::{coefficient_jet, Coefficients, Group};
use crate::error::{Error, Result};
use crate::fem::assembly::{self, p1_eval, FormCoeffs};
use crate::fem::state::{solve_on, StateBundle};
use crate::fem::{DiskMesh, EllipticProblem, MappedMesh, Rule};
use crate::geometry::GaugeFunction;
use crate::linalg::{KrylovOptions, SolveStats};
use crate::small::{Mat2, Vec2};
use crate::spectral::TrigInterpolant;
use crate::Real;

/// Derivatives `[d/dt, d²/dt²]` of the operator coefficients at one point.
#[derive(Clone, Copy, Debug, Default)]
pub struct OperatorJet<T> {
    pub a: [Mat2<T>; 2],
    pub b: [Vec2<T>; 2],
    pub c: [T; 2],
}

/// Derivatives of the source and integrand coefficients at one point.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadJet<T> {
    pub f: [T; 2],
    pub alpha: [Mat2<T>; 2],
    pub alpha00: [T; 2],
    pub beta: [Vec2<T>; 2],
    pub gamma: [T; 2],
    pub delta: [T; 2],
}

/// Transported-coefficient jets at the quadrature points of every element:
/// the order-2 rule for the operator, the order-4 rule for source and integrand.
#[derive(Clone, Debug)]
pub struct TransportJet<T> {
    pub order: u8,
    pub operator: Vec<OperatorJet<T>>,
    pub load: Vec<LoadJet<T>>,
}

/// Element-constant gradient `G_ij = ∂_j ξ_i` and the three vertex values.
fn element_field<T: Real>(mesh: &MappedMesh<T>, e: usize, xi: &[Vec2<T>]) -> ([Vec2<T>; 3], Mat2<T>) {
    let t = mesh.triangles()[e];
    let el = mesh.elements()[e];
    let vals = [xi[t[0]], xi[t[1]], xi[t[2]]];
    let mut g = Mat2::zero();
    for i in 0..3 {
        g += vals[i].outer(el.grads[i]);
    }
    (vals, g)
}

fn interp<T: Real>(vals: &[Vec2<T>; 3], lam: &[T; 3]) -> Vec2<T> {
    vals[0].scale(lam[0]) + vals[1].scale(lam[1]) + vals[2].scale(lam[2])
}

fn to_operator<T: Real>(d: &[Coefficients<T>; 3]) -> OperatorJet<T> {
    OperatorJet { a: [d[1].a, d[2].a], b: [d[1].b, d[2].b], c: [d[1].c, d[2].c] }
}

fn to_load<T: Real>(d: &[Coefficients<T>; 3]) -> LoadJet<T> {
    LoadJet {
        f: [d[1].f, d[2].f],
        alpha: [d[1].alpha, d[2].alpha],
        alpha00: [d[1].alpha00, d[2].alpha00],
        beta: [d[1].beta, d[2].beta],
        gamma: [d[1].gamma, d[2].gamma],
        delta: [d[1].delta, d[2].delta],
    }
}

type ElementJets<T> = (Vec<OperatorJet<T>>, Vec<LoadJet<T>>);

#[allow(clippy::too_many_arguments)]
fn element_jets<T: Real>(
    prob: &EllipticProblem<T>,
    mesh: &MappedMesh<T>,
    e: usize,
    vals: &[Vec2<T>; 3],
    g: Mat2<T>,
    order: u8,
    r2: &Rule<T>,
    r4: &Rule<T>,
) -> Result<ElementJets<T>> {
    let mut op = Vec::with_capacity(r2.len());
    for lam in &r2.points {
        let d = coefficient_jet(prob, mesh.point(e, lam), interp(vals, lam), g, order, Group::Operator)?;
        op.push(to_operator(&d));
    }
    let mut ld = Vec::with_capacity(r4.len());
    for lam in &r4.points {
        let d = coefficient_jet(prob, mesh.point(e, lam), interp(vals, lam), g, order, Group::Load)?;
        ld.push(to_load(&d));
    }
    Ok((op, ld))
}

/// Jets of all transported coefficients for the nodal displacement `xi`.
pub fn transport_jet<T: Real>(
    prob: &EllipticProblem<T>,
    mesh: &MappedMesh<T>,
    xi: &[Vec2<T>],
    order: u8,
) -> Result<TransportJet<T>> {
    if !(order == 1 || order == 2) {
        return Err(Error::invalid(format!("jet order must be 1 or 2, got {order}")));
    }
    if xi.len() != mesh.nodes().len() {
        return Err(Error::invalid("displacement length does not match the mesh"));
    }
    if order == 2 {
        prob.require_second_derivatives(mesh.nodes()[0])?;
    }
    let (r2, r4) = (Rule::order2(), Rule::order4());
    let parts: Result<Vec<ElementJets<T>>> = (0..mesh.elements().len())
        .into_par_iter()
        .map(|e| {
            let (vals, g) = element_field(mesh, e, xi);
            element_jets(prob, mesh, e, &vals, g, order, &r2, &r4)
        })
        .collect();
    let parts = parts?;
    let mut operator = Vec::with_capacity(parts.len() * r2.len());
    let mut load = Vec::with_capacity(parts.len() * r4.len());
    for (o, l) in parts {
        operator.extend(o);
        load.extend(l);
    }
    Ok(TransportJet { order, operator, load })
}

impl<T: Real> TransportJet<T> {
    fn op(&self, e: usize, q: usize, k: usize) -> FormCoeffs<T> {
        let j = &self.operator[3 * e + q];
        FormCoeffs { a: j.a[k], b: j.b[k], c: j.c[k] }
    }

    fn ld(&self, e: usize, q: usize) -> &LoadJet<T> {
        &self.load[6 * e + q]
    }

    /// Entry `M̂'` of the transported operator matrix at point `q` of element `e`.
    pub fn a1(&self, e: usize, q: usize) -> Mat2<T> {
        self.operator[3 * e + q].a[0]
    }
}

/// Nodal right-hand side `F'(φ_i) − a'(U, φ_i)`.
pub fn rhs_first<T: Real>(mesh: &MappedMesh<T>, jet: &TransportJet<T>, u: &[T]) -> Vec<T> {
    let r2 = Rule::order2();
    let r4 = Rule::order4();
    let load = assembly::assemble_load(mesh, &r4, |e, q, _| jet.ld(e, q).f[0]);
    let form = assembly::apply_form(mesh, &r2, |e, q, _| jet.op(e, q, 0), u);
    load.iter().zip(&form).map(|(&l, &f)| l - f).collect()
}

/// Nodal right-hand side `F''(φ_i) − a''(U, φ_i) − 2a'(U', φ_i)`.
pub fn rhs_second<T: Real>(mesh: &MappedMesh<T>, jet: &TransportJet<T>, u: &[T], md1: &[T]) -> Vec<T> {
    let r2 = Rule::order2();
    let r4 = Rule::order4();
    let two = T::lit(2.0);
    let load = assembly::assemble_load(mesh, &r4, |e, q, _| jet.ld(e, q).f[1]);
    let f2 = assembly::apply_form(mesh, &r2, |e, q, _| jet.op(e, q, 1), u);
    let f1 = assembly::apply_form(mesh, &r2, |e, q, _| jet.op(e, q, 0), md1);
    (0..load.len()).map(|i| load[i] - f2[i] - two * f1[i]).collect()
}

/// A material-derivative solve.
#[derive(Clone, Debug)]
pub struct MdSolve<T> {
    /// Nodal values, zero on the boundary.
    pub values: Vec<T>,
    pub stats: SolveStats,
    pub residual: f64,
}

fn solve_rhs<T: Real>(bundle: &StateBundle<T>, nodal_rhs: &[T]) -> Result<MdSolve<T>> {
    let rhs = assembly::restrict(&bundle.mesh, nodal_rhs);
    let (x, stats) = bundle.operator.solve(&rhs)?;
    let residual = bundle.operator.relative_residual(&x, &rhs);
    Ok(MdSolve { values: assembly::extend(&bundle.mesh, &x), stats, residual })
}

/// First material derivative `Û'₀`.
pub fn solve_md1<T: Real>(bundle: &StateBundle<T>, jet: &TransportJet<T>) -> Result<MdSolve<T>> {
    solve_rhs(bundle, &rhs_first(&bundle.mesh, jet, &bundle.u))
}

/// Second material derivative `Û''₀`; needs an order-2 jet and `Û'₀`.
pub fn solve_md2<T: Real>(bundle: &StateBundle<T>, jet: &TransportJet<T>, md1: &[T]) -> Result<MdSolve<T>> {
    if jet.order < 2 {
        return Err(Error::invalid("second material derivative needs an order-2 jet"));
    }
    solve_rhs(bundle, &rhs_second(&bundle.mesh, jet, &bundle.u, md1))
}

/// Value, gradient and `∂K` of the state at load point `q` of element `e`.
struct PointState<T> {
    x: Vec2<T>,
    w: T,
    q: Vec2<T>,
    du: T,
    dq: Vec2<T>,
}

fn point_state<T: Real>(prob: &EllipticProblem<T>, mesh: &MappedMesh<T>, u: &[T], e: usize, lam: &[T; 3]) -> PointState<T> {
    let x = mesh.point(e, lam);
    let (w, q) = p1_eval(mesh, e, lam, u);
    let (du, dq) = prob.k.partials(x, w, q);
    PointState { x, w, q, du, dq }
}

/// Explicit part `K̂^{(k)}` of the transported integrand at fixed state.
fn explicit<T: Real>(j: &LoadJet<T>, k: usize, w: T, q: Vec2<T>) -> T {
    let half = T::lit(0.5);
    half * (j.alpha[k].bilinear(q, q) + j.alpha00[k] * w * w) + j.beta[k].dot(q) + j.gamma[k] * w + j.delta[k]
}

/// `E'(ξ)` from the state and `Û'₀`.
pub fn energy_first<T: Real>(prob: &EllipticProblem<T>, bundle: &StateBundle<T>, jet: &TransportJet<T>, md1: &[T]) -> T {
    let mesh = &bundle.mesh;
    let r4 = Rule::order4();
    assembly::integrate(mesh, &r4, |e, qi, _| {
        let lam = &r4.points[qi];
        let s = point_state(prob, mesh, &bundle.u, e, lam);
        let (w1, g1) = p1_eval(mesh, e, lam, md1);
        explicit(jet.ld(e, qi), 0, s.w, s.q) + s.du * w1 + s.dq.dot(g1)
    })
}

/// `E''(ξ, ξ)` from the state, `Û'₀` and `Û''₀`.
pub fn energy_second<T: Real>(
    prob: &EllipticProblem<T>,
    bundle: &StateBundle<T>,
    jet: &TransportJet<T>,
    md1: &[T],
    md2: &[T],
) -> T {
    let mesh = &bundle.mesh;
    let r4 = Rule::order4();
    let two = T::lit(2.0);
    assembly::integrate(mesh, &r4, |e, qi, _| {
        let lam = &r4.points[qi];
        let s = point_state(prob, mesh, &bundle.u, e, lam);
        let (w1, g1) = p1_eval(mesh, e, lam, md1);
        let (w2, g2) = p1_eval(mesh, e, lam, md2);
        explicit(jet.ld(e, qi), 1, s.w, s.q)
            + two * mixed(jet.ld(e, qi), &s, w1, g1)
            + quadratic(prob, s.x, w1, g1)
            + s.du * w2
            + s.dq.dot(g2)
    })
}

/// `α̂'∇U·∇U' + α̂₀₀'UU' + β̂'·∇U' + γ̂'U'`.
fn mixed<T: Real>(j: &LoadJet<T>, s: &PointState<T>, w1: T, g1: Vec2<T>) -> T {
    j.alpha[0].bilinear(s.q, g1) + j.alpha00[0] * s.w * w1 + j.beta[0].dot(g1) + j.gamma[0] * w1
}

/// `α∇U'·∇U' + α₀₀U'²`.
fn quadratic<T: Real>(prob: &EllipticProblem<T>, x: Vec2<T>, w1: T, g1: Vec2<T>) -> T {
    prob.k.alpha.value(x).bilinear(g1, g1) + prob.k.alpha00.value(x) * w1 * w1
}

/// Explicit part of `E'` or `E''` (no material-derivative terms).
fn explicit_integral<T: Real>(prob: &EllipticProblem<T>, bundle: &StateBundle<T>, jet: &TransportJet<T>, k: usize) -> T {
    let mesh = &bundle.mesh;
    let r4 = Rule::order4();
    assembly::integrate(mesh, &r4, |e, qi, _| {
        let s = point_state(prob, mesh, &bundle.u, e, &r4.points[qi]);
        explicit(jet.ld(e, qi), k, s.w, s.q)
    })
}

/// Nodal `P` with `a(φ, P) = ∫ ∂_U K φ + ∂_q K·∇φ` for all test `φ`.
pub fn solve_adjoint<T: Real>(prob: &EllipticProblem<T>, bundle: &StateBundle<T>) -> Result<MdSolve<T>> {
    let mesh = &bundle.mesh;
    let r4 = Rule::order4();
    let g = assembly::assemble_functional(mesh, &r4, |e, qi, _| {
        let s = point_state(prob, mesh, &bundle.u, e, &r4.points[qi]);
        (s.du, s.dq)
    });
    let rhs = assembly::restrict(mesh, &g);
    let (x, stats) = bundle.operator.solve_transpose(&rhs)?;
    let residual = {
        let at = bundle.operator.matrix().mul_transpose_vec(&x);
        let r: Vec<T> = rhs.iter().zip(&at).map(|(&b, &a)| b - a).collect();
        let bn = crate::linalg::norm2(&rhs);
        let rn = crate::linalg::norm2(&r);
        if bn > T::zero() { rn / bn } else { rn }.to_f64_lossy()
    };
    Ok(MdSolve { values: assembly::extend(mesh, &x), stats, residual })
}

/// `E'(ξ)` through the adjoint state: `∫ K̂' + F'(P) − a'(U, P)`.
pub fn energy_first_adjoint<T: Real>(
    prob: &EllipticProblem<T>,
    bundle: &StateBundle<T>,
    jet: &TransportJet<T>,
    adjoint: &[T],
) -> T {
    let rhs = rhs_first(&bundle.mesh, jet, &bundle.u);
    explicit_integral(prob, bundle, jet, 0) + crate::linalg::dot(&rhs, adjoint)
}

/// `E''(ξ, ξ)` through the adjoint state; `Û''₀` is never formed.
pub fn energy_second_adjoint<T: Real>(
    prob: &EllipticProblem<T>,
    bundle: &StateBundle<T>,
    jet: &TransportJet<T>,
    md1: &[T],
    adjoint: &[T],
) -> T {
    let mesh = &bundle.mesh;
    let r4 = Rule::order4();
    let two = T::lit(2.0);
    let local = assembly::integrate(mesh, &r4, |e, qi, _| {
        let lam = &r4.points[qi];
        let s = point_state(prob, mesh, &bundle.u, e, lam);
        let (w1, g1) = p1_eval(mesh, e, lam, md1);
        explicit(jet.ld(e, qi), 1, s.w, s.q) + two * mixed(jet.ld(e, qi), &s, w1, g1) + quadratic(prob, s.x, w1, g1)
    });
    let rhs = rhs_second(mesh, jet, &bundle.u, md1);
    local + crate::linalg::dot(&rhs, adjoint)
}

/// How `E'` and `E''` are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    /// Material-derivative solves for `Û'₀`, `Û''₀` and `E'(ξ²)`.
    #[default]
    Direct,
    /// One shared adjoint solve; one `Û'₀` solve per direction.
    Adjoint,
}

#[derive(Clone, Copy, Debug)]
pub struct ShapeOptions<T> {
    pub profile: Profile<T>,
    pub krylov: KrylovOptions,
    pub method: Method,
}

impl<T: Real> Default for ShapeOptions<T> {
    fn default() -> Self {
        Self { profile: Profile::default(), krylov: KrylovOptions::default(), method: Method::Direct }
    }
}

/// Energy and its derivatives along the boundary direction `v`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ShapeDerivatives<T> {
    pub energy: T,
    /// `e'(u)(v) = E'(ξ¹)`.
    pub de: T,
    /// `e''(u)(v, v) = E''(ξ¹, ξ¹) + E'(ξ²)`.
    pub d2e: T,
    /// `E''(ξ¹, ξ¹)`.
    pub e2_xi1: T,
    /// `E'(ξ²)`.
    pub e1_xi2: T,
    /// Largest relative residual of the material-derivative solves.
    pub md_residual: f64,
    /// `‖ξ¹‖_{W^{1,∞}}`.
    pub xi_w1inf: T,
}

/// A solved state on `Ω_u` from which derivatives in many directions are taken.
pub struct ShapeContext<'p, T> {
    prob: &'p EllipticProblem<T>,
    u: GaugeFunction<T>,
    base: DiskMesh<T>,
    state: StateBundle<T>,
    opts: ShapeOptions<T>,
    adjoint: OnceLock<Arc<MdSolve<T>>>,
}

impl<'p, T: Real> ShapeContext<'p, T> {
    pub fn new(prob: &'p EllipticProblem<T>, u: &GaugeFunction<T>, mesh: &DiskMesh<T>, opts: ShapeOptions<T>) -> Result<Self> {
        opts.profile.validate()?;
        prob.check(T::one() / u.min())?;
        let mapped = Arc::new(mesh.map(u)?);
        let state = solve_on(prob, mapped, &opts.krylov)?;
        Ok(Self { prob, u: u.clone(), base: mesh.clone(), state, opts, adjoint: OnceLock::new() })
    }

    pub fn state(&self) -> &StateBundle<T> {
        &self.state
    }

    pub fn gauge(&self) -> &GaugeFunction<T> {
        &self.u
    }

    pub fn mesh(&self) -> &DiskMesh<T> {
        &self.base
    }

    pub fn options(&self) -> &ShapeOptions<T> {
        &self.opts
    }

    pub fn problem(&self) -> &EllipticProblem<T> {
        self.prob
    }

    pub fn energy(&self) -> T {
        self.state.energy
    }

    pub fn field(&self, v: &[T]) -> Result<DeformationField<T>> {
        DeformationField::new(&self.u, v, self.opts.profile)
    }

    /// The adjoint state, solved on first use.
    pub fn adjoint(&self) -> Result<Arc<MdSolve<T>>> {
        if let Some(p) = self.adjoint.get() {
            return Ok(p.clone());
        }
        let p = Arc::new(solve_adjoint(self.prob, &self.state)?);
        Ok(self.adjoint.get_or_init(|| p).clone())
    }

    /// `E'(ξ)` for an arbitrary nodal displacement.
    pub fn first_along(&self, xi: &[Vec2<T>]) -> Result<(T, MdSolve<T>)> {
        let jet = transport_jet(self.prob, &self.state.mesh, xi, 1)?;
        let md1 = solve_md1(&self.state, &jet)?;
        Ok((energy_first(self.prob, &self.state, &jet, &md1.values), md1))
    }

    /// `e'(u)(v)` only.
    pub fn first(&self, v: &[T]) -> Result<T> {
        let xi = self.field(v)?.first(&self.base);
        match self.opts.method {
            Method::Direct => Ok(self.first_along(&xi)?.0),
            Method::Adjoint => {
                let jet = transport_jet(self.prob, &self.state.mesh, &xi, 1)?;
                Ok(energy_first_adjoint(self.prob, &self.state, &jet, &self.adjoint()?.values))
            }
        }
    }

    /// `e`, `e'(u)(v)` and `e''(u)(v, v)`.
    pub fn derivatives(&self, v: &[T]) -> Result<ShapeDerivatives<T>> {
        let field = self.field(v)?;
        let xi1 = field.first(&self.base);
        let xi2 = field.second(&self.base);
        let mesh = &self.state.mesh;
        let jet = transport_jet(self.prob, mesh, &xi1, 2)?;
        let md1 = solve_md1(&self.state, &jet)?;
        let jet2 = transport_jet(self.prob, mesh, &xi2, 1)?;
        let (de, e2, e1_xi2, res) = match self.opts.method {
            Method::Direct => {
                let md2 = solve_md2(&self.state, &jet, &md1.values)?;
                let e2 = energy_second(self.prob, &self.state, &jet, &md1.values, &md2.values);
                let (e1_xi2, md1b) = {
                    let m = solve_md1(&self.state, &jet2)?;
                    (energy_first(self.prob, &self.state, &jet2, &m.values), m)
                };
                let de = energy_first(self.prob, &self.state, &jet, &md1.values);
                (de, e2, e1_xi2, md1.residual.max(md2.residual).max(md1b.residual))
            }
            Method::Adjoint => {
                let p = self.adjoint()?;
                let de = energy_first_adjoint(self.prob, &self.state, &jet, &p.values);
                let e2 = energy_second_adjoint(self.prob, &self.state, &jet, &md1.values, &p.values);
                let e1_xi2 = energy_first_adjoint(self.prob, &self.state, &jet2, &p.values);
                (de, e2, e1_xi2, md1.residual.max(p.residual))
            }
        };
        Ok(ShapeDerivatives {
            energy: self.state.energy,
            de,
            d2e: e2 + e1_xi2,
            e2_xi1: e2,
            e1_xi2,
            md_residual: res,
            xi_w1inf: w1inf_norm(mesh, &xi1),
        })
    }

    /// `∂e/∂u_i = e'(u)(δ_i)` row by row, one material-derivative solve per row.
    pub fn gradient_rows(&self) -> Result<Vec<T>> {
        let n = self.u.n();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut v = vec![T::zero(); n];
                v[i] = T::one();
                let xi = self.field(&v)?.first(&self.base);
                Ok(self.first_along(&xi)?.0)
            })
            .collect()
    }

    /// `∂e/∂u_i` for all `i` from one adjoint solve.
    pub fn gradient(&self) -> Result<Vec<T>> {
        let p = self.adjoint()?;
        let sens = nodal_sensitivity(self.prob, &self.state, &p.values)?;
        let interp: &TrigInterpolant<T> = self.u.interpolant();
        let radius = self.base.radius();
        let angle = self.base.angle();
        let mut thetas = Vec::new();
        let mut weights = Vec::new();
        for k in 0..sens.len() {
            let eta = self.opts.profile.eta(radius[k]);
            if eta == T::zero() {
                continue;
            }
            let th = angle[k];
            let uk = interp.eval(th);
            thetas.push(th);
            weights.push(-eta / (uk * uk) * sens[k].dot(Vec2::polar_unit(th)));
        }
        Ok(TrigInterpolant::eval_transpose(self.u.n(), &thetas, &weights))
    }
}

/// `∂E'(ξ)/∂ξ_k` for every node through the adjoint state: `E'(ξ) = Σ_k s_k·ξ_k`.
pub fn nodal_sensitivity<T: Real>(prob: &EllipticProblem<T>, bundle: &StateBundle<T>, adjoint: &[T]) -> Result<Vec<Vec2<T>>> {
    let mesh = &bundle.mesh;
    let (r2, r4) = (Rule::order2(), Rule::order4());
    let locals: Result<Vec<[Vec2<T>; 3]>> = (0..mesh.elements().len())
        .into_par_iter()
        .map(|e| {
            let mut out = [Vec2::zero(); 3];
            for node in 0..3 {
                for comp in 0..2 {
                    let mut vals = [Vec2::zero(); 3];
                    vals[node] = if comp == 0 { Vec2::new(T::one(), T::zero()) } else { Vec2::new(T::zero(), T::one()) };
                    let el = mesh.elements()[e];
                    let g = vals[node].outer(el.grads[node]);
                    let (op, ld) = element_jets(prob, mesh, e, &vals, g, 1, &r2, &r4)?;
                    let c = element_first_adjoint(prob, mesh, e, &op, &ld, &bundle.u, adjoint, &r2, &r4);
                    if comp == 0 {
                        out[node].x = c;
                    } else {
                        out[node].y = c;
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut sens = vec![Vec2::zero(); mesh.nodes().len()];
    for (t, l) in mesh.triangles().iter().zip(locals?) {
        for i in 0..3 {
            sens[t[i]] += l[i];
        }
    }
    Ok(sens)
}

/// Element share of `∫ K̂' + F'(P) − a'(U, P)`.
#[allow(clippy::too_many_arguments)]
fn element_first_adjoint<T: Real>(
    prob: &EllipticProblem<T>,
    mesh: &MappedMesh<T>,
    e: usize,
    op: &[OperatorJet<T>],
    ld: &[LoadJet<T>],
    u: &[T],
    p: &[T],
    r2: &Rule<T>,
    r4: &Rule<T>,
) -> T {
    let area = mesh.elements()[e].area;
    let mut acc = T::zero();
    for (qi, (lam, &w)) in r4.points.iter().zip(&r4.weights).enumerate() {
        let s = point_state(prob, mesh, u, e, lam);
        let (pv, _) = p1_eval(mesh, e, lam, p);
        acc += w * (explicit(&ld[qi], 0, s.w, s.q) + ld[qi].f[0] * pv);
    }
    for (qi, (lam, &w)) in r2.points.iter().zip(&r2.weights).enumerate() {
        let (uv, ug) = p1_eval(mesh, e, lam, u);
        let (pv, pg) = p1_eval(mesh, e, lam, p);
        let j = &op[qi];
        acc -= w * (j.a[0].bilinear(pg, ug) + (j.b[0].dot(ug) + j.c[0] * uv) * pv);
    }
    acc * area
}

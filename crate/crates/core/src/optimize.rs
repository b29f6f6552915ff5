//! Projected-gradient minimization of `j(u) = R(e(u), m(u)) − w_p·p(u)` over
//! `{D²u + u ≥ 0, 1/b ≤ u ≤ 1/a}` and diagnostics of the optimal measure.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fem::{DiskMesh, Problem};
use crate::geometry::{
    area_gradient, area_perimeter, convexity_residual, detect_polygon, perimeter_gradient, project_admissible, project_samples, Annulus,
    ConvexityResidual, GaugeFunction, Order, PolygonOptions, PolygonReport, ProjectionOptions,
};
use crate::linalg::{dot, KrylovOptions};
use crate::plot::{Svg, PALETTE};
use crate::shapecalc::{Profile, ShapeContext, ShapeOptions};
use crate::Real;

/// `R(E, m) = c + e·E + m·M + ee·E² + em·E·M + mm·M²`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quadratic<T> {
    pub c: T,
    pub e: T,
    pub m: T,
    pub ee: T,
    pub em: T,
    pub mm: T,
}

impl<T: Real> Quadratic<T> {
    pub fn zero() -> Self {
        Self { c: T::zero(), e: T::zero(), m: T::zero(), ee: T::zero(), em: T::zero(), mm: T::zero() }
    }

    /// `μ₁E + μ₂m`.
    pub fn linear(e: T, m: T) -> Self {
        Self { e, m, ..Self::zero() }
    }

    pub fn value(&self, e: T, m: T) -> T {
        self.c + self.e * e + self.m * m + self.ee * e * e + self.em * e * m + self.mm * m * m
    }

    pub fn d_e(&self, e: T, m: T) -> T {
        self.e + T::lit(2.0) * self.ee * e + self.em * m
    }

    pub fn d_m(&self, e: T, m: T) -> T {
        self.m + self.em * e + T::lit(2.0) * self.mm * m
    }

    pub fn depends_on_e(&self) -> bool {
        self.e != T::zero() || self.ee != T::zero() || self.em != T::zero()
    }

    fn coefficients(&self) -> [T; 6] {
        [self.c, self.e, self.m, self.ee, self.em, self.mm]
    }
}

#[derive(Clone, Debug)]
pub struct ObjectiveSpec<T> {
    pub r: Quadratic<T>,
    pub perimeter_weight: T,
    pub annulus: Annulus<T>,
    /// Required when `R` depends on `E`.
    pub problem: Option<Problem<T>>,
}

impl<T: Real> ObjectiveSpec<T> {
    pub fn new(r: Quadratic<T>, perimeter_weight: T, annulus: Annulus<T>, problem: Option<Problem<T>>) -> Result<Self> {
        if r.coefficients().iter().any(|c| !c.is_finite()) || !perimeter_weight.is_finite() {
            return Err(Error::invalid("objective coefficients must be finite"));
        }
        if r.depends_on_e() && problem.is_none() {
            return Err(Error::invalid("R depends on E but no elliptic problem is attached"));
        }
        Ok(Self { r, perimeter_weight, annulus, problem })
    }

    /// `R ≡ 0`: `j = −w_p·p`.
    pub fn geometric(r: Quadratic<T>, perimeter_weight: T, annulus: Annulus<T>) -> Result<Self> {
        Self::new(r, perimeter_weight, annulus, None)
    }

    fn uses_pde(&self) -> bool {
        self.r.depends_on_e()
    }
}

/// How `∂e/∂u_i` is assembled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GradientMethod {
    /// One adjoint solve for all rows.
    #[default]
    Adjoint,
    /// One material-derivative solve per row.
    Rows,
}

#[derive(Clone, Copy, Debug)]
pub struct ObjectiveOptions {
    pub gradient: GradientMethod,
    pub krylov: KrylovOptions,
}

impl Default for ObjectiveOptions {
    fn default() -> Self {
        Self { gradient: GradientMethod::Adjoint, krylov: KrylovOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ObjectiveValue<T> {
    pub j: T,
    /// `e(u)`, when the objective involves the PDE.
    pub e: Option<T>,
    pub m: T,
    pub p: T,
    pub gradient: Option<Vec<T>>,
}

fn evaluate<T: Real>(
    spec: &ObjectiveSpec<T>,
    u: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    opts: &ObjectiveOptions,
    with_gradient: bool,
) -> Result<ObjectiveValue<T>> {
    let geo = area_perimeter(u, None, Order::Zero)?;
    let (m, p) = (geo.m, geo.p);
    let (e, de) = match (&spec.problem, spec.uses_pde()) {
        (Some(prob), true) => {
            let shape = ShapeOptions { profile: Profile::Radial, krylov: opts.krylov, ..ShapeOptions::default() };
            let ctx = ShapeContext::new(prob, u, mesh, shape)?;
            let grad = if with_gradient {
                Some(match opts.gradient {
                    GradientMethod::Adjoint => ctx.gradient()?,
                    GradientMethod::Rows => ctx.gradient_rows()?,
                })
            } else {
                None
            };
            (Some(ctx.energy()), grad)
        }
        _ => (None, None),
    };
    let ev = e.unwrap_or_else(T::zero);
    let j = spec.r.value(ev, m) - spec.perimeter_weight * p;
    let gradient = with_gradient.then(|| {
        let (re, rm) = (spec.r.d_e(ev, m), spec.r.d_m(ev, m));
        let gm = area_gradient(u);
        let gp = perimeter_gradient(u);
        (0..u.n())
            .map(|i| {
                let ge = de.as_ref().map_or(T::zero(), |d| re * d[i]);
                ge + rm * gm[i] - spec.perimeter_weight * gp[i]
            })
            .collect()
    });
    Ok(ObjectiveValue { j, e, m, p, gradient })
}

/// `j(u)` and its nodal gradient.
pub fn objective<T: Real>(
    spec: &ObjectiveSpec<T>,
    u: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    opts: &ObjectiveOptions,
) -> Result<ObjectiveValue<T>> {
    evaluate(spec, u, mesh, opts, true)
}

#[derive(Clone, Copy, Debug)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Stop when `‖u − P(u − ∇j)‖_∞ ≤ ktol`.
    pub ktol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub min_step: f64,
    pub max_step: f64,
    pub objective: ObjectiveOptions,
    pub projection: ProjectionOptions,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            ktol: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            min_step: 1e-10,
            max_step: 1e4,
            objective: ObjectiveOptions::default(),
            projection: ProjectionOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IterationRecord<T> {
    pub iter: usize,
    pub j: T,
    pub e: Option<T>,
    pub m: T,
    pub p: T,
    pub kkt: T,
    /// Accepted step length (zero on the initial row).
    pub step: T,
    pub backtracks: usize,
}

/// Nodes where a constraint holds with equality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActiveSets {
    /// `u_i = 1/a`: boundary on the inner circle.
    pub inner: Vec<usize>,
    /// `u_i = 1/b`: boundary on the outer circle.
    pub outer: Vec<usize>,
    /// `(D²u + u)_i = 0`: locally straight.
    pub cone: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    BudgetExhausted,
    /// No step along the projected arc decreased `j`.
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct OptimizationResult<T> {
    pub u: GaugeFunction<T>,
    pub trace: Vec<IterationRecord<T>>,
    pub kkt: T,
    pub termination: Termination,
    pub residual: ConvexityResidual<T>,
    /// `None` when the measure carries no positive mass.
    pub polygon: Option<PolygonReport<T>>,
    pub active: ActiveSets,
    pub annulus: Annulus<T>,
}

/// `P(u − t g)`.
fn projected_step<T: Real>(u: &GaugeFunction<T>, g: &[T], t: T, ann: &Annulus<T>, popts: &ProjectionOptions) -> Result<GaugeFunction<T>> {
    let y: Vec<T> = u.samples().iter().zip(g).map(|(&a, &b)| a - t * b).collect();
    project_samples(&y, ann, popts)
}

fn kkt_residual<T: Real>(u: &GaugeFunction<T>, g: &[T], ann: &Annulus<T>, popts: &ProjectionOptions) -> Result<T> {
    let trial = projected_step(u, g, T::one(), ann, popts)?;
    Ok(trial.samples().iter().zip(u.samples()).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max))
}

fn active_sets<T: Real>(u: &GaugeFunction<T>, mu: &ConvexityResidual<T>, ann: &Annulus<T>) -> ActiveSets {
    let tol = T::lit(1e-6) * T::one().max(u.sup_norm());
    let mut out = ActiveSets::default();
    for (i, &x) in u.samples().iter().enumerate() {
        if (x - ann.u_upper()).abs() <= tol {
            out.inner.push(i);
        }
        if ann.u_lower().is_some_and(|lo| (x - lo).abs() <= tol) {
            out.outer.push(i);
        }
    }
    let scale = mu.weak.iter().fold(T::one(), |m, &v| m.max(v.abs()));
    out.cone = (0..mu.n()).filter(|&i| mu.weak[i] <= T::lit(1e-6) * scale).collect();
    out
}

/// Projected gradient with Barzilai–Borwein initial steps and Armijo
/// backtracking along the projection arc.
pub fn minimize<T: Real>(
    spec: &ObjectiveSpec<T>,
    u0: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    opts: &MinimizeOptions,
) -> Result<OptimizationResult<T>> {
    if !(opts.backtrack > 0.0 && opts.backtrack < 1.0) || !(opts.armijo > 0.0 && opts.armijo < 1.0) {
        return Err(Error::invalid("line search needs backtrack and armijo factors in (0, 1)"));
    }
    let ann = spec.annulus;
    let popts = &opts.projection;
    let mut u = project_admissible(u0, &ann, popts)?;
    let mut cur = objective(spec, &u, mesh, &opts.objective)?;
    let mut g = cur.gradient.take().expect("gradient requested");
    let mut kkt = kkt_residual(&u, &g, &ann, popts)?;
    let record = |iter, v: &ObjectiveValue<T>, kkt, step, backtracks| IterationRecord {
        iter,
        j: v.j,
        e: v.e,
        m: v.m,
        p: v.p,
        kkt,
        step,
        backtracks,
    };
    let mut trace = vec![record(0, &cur, kkt, T::zero(), 0)];
    let (min_step, max_step) = (T::lit(opts.min_step), T::lit(opts.max_step));
    let gmax = g.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let mut alpha = if gmax > T::zero() { (T::lit(0.1) * u.min() / gmax).clamp(min_step, max_step) } else { T::one() };
    let mut termination = Termination::BudgetExhausted;

    for iter in 1..=opts.max_iter {
        if ann.is_singleton() || kkt <= T::lit(opts.ktol) {
            termination = Termination::Converged;
            break;
        }
        let mut t = alpha;
        let mut accepted = None;
        for bt in 0..=opts.max_backtracks {
            let trial = projected_step(&u, &g, t, &ann, popts)?;
            let d: Vec<T> = trial.samples().iter().zip(u.samples()).map(|(a, b)| *a - *b).collect();
            let decrease = dot(&g, &d);
            let val = match evaluate(spec, &trial, mesh, &opts.objective, false) {
                Ok(v) => Some(v),
                Err(e) if e.is_solver_failure() => None,
                Err(e) => return Err(e),
            };
            if let Some(v) = val {
                let slack = T::lit(1e-12) * T::one().max(cur.j.abs());
                if decrease < T::zero() && v.j <= cur.j + T::lit(opts.armijo) * decrease && v.j < cur.j + slack {
                    accepted = Some((trial, t, bt));
                    break;
                }
            }
            t *= T::lit(opts.backtrack);
            if t < min_step {
                break;
            }
        }
        let Some((next, step, bt)) = accepted else {
            termination = Termination::LineSearchFailed;
            break;
        };
        let mut nv = objective(spec, &next, mesh, &opts.objective)?;
        let ng = nv.gradient.take().expect("gradient requested");
        let s: Vec<T> = next.samples().iter().zip(u.samples()).map(|(a, b)| *a - *b).collect();
        let y: Vec<T> = ng.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s, &y);
        alpha = if sy > T::zero() { (dot(&s, &s) / sy).clamp(min_step, max_step) } else { (step * T::lit(2.0)).min(max_step) };
        u = next;
        g = ng;
        cur = nv;
        kkt = kkt_residual(&u, &g, &ann, popts)?;
        trace.push(record(iter, &cur, kkt, step, bt));
    }
    if kkt <= T::lit(opts.ktol) || ann.is_singleton() {
        termination = Termination::Converged;
    }

    let residual = convexity_residual(&u);
    let polygon = detect_polygon(&residual, &PolygonOptions::default()).ok();
    let active = active_sets(&u, &residual, &ann);
    Ok(OptimizationResult { u, trace, kkt, termination, residual, polygon, active, annulus: ann })
}

/// Mass concentration of `u'' + u` restricted to the nodes off both circles.
#[derive(Clone, Debug)]
pub struct ArcConcentration<T> {
    pub arc_nodes: usize,
    pub arc_mass: T,
    /// Number of windows needed for the captured fraction.
    pub vertices: usize,
    pub captured_fraction: T,
    /// Window nodes over arc nodes.
    pub arc_coverage: T,
    pub report: PolygonReport<T>,
}

impl<T: Real> OptimizationResult<T> {
    /// Greedy window capture of the cone measure on the inactive arc.
    pub fn arc_concentration(&self, opts: &PolygonOptions<T>) -> Result<ArcConcentration<T>> {
        let n = self.u.n();
        let mut on_circle = vec![false; n];
        for &i in self.active.inner.iter().chain(&self.active.outer) {
            on_circle[i] = true;
        }
        let arc_nodes = on_circle.iter().filter(|b| !**b).count();
        if arc_nodes == 0 {
            return Err(Error::DegenerateMeasure("the boundary lies on the annulus everywhere".into()));
        }
        let mut masked = self.residual.clone();
        for (i, m) in masked.masses.iter_mut().enumerate() {
            if on_circle[i] {
                *m = T::zero();
            }
        }
        masked.total_mass = masked.masses.iter().map(|m| m.max(T::zero())).sum();
        let report = detect_polygon(&masked, opts)?;
        let window_nodes: usize = report.vertices.iter().map(|v| v.width).sum();
        Ok(ArcConcentration {
            arc_nodes,
            arc_mass: masked.total_mass,
            vertices: report.vertex_count(),
            captured_fraction: report.captured_fraction,
            arc_coverage: T::from_usize_lossy(window_nodes) / T::from_usize_lossy(arc_nodes),
            report,
        })
    }

    /// `# optimize_trace v1`, then `iter,j,e,m,p,kkt,step,backtracks` rows.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::from("# optimize_trace v1\niter,j,e,m,p,kkt,step,backtracks\n");
        for r in &self.trace {
            let e = r.e.map(|x| x.to_string()).unwrap_or_default();
            writeln!(s, "{},{},{e},{},{},{},{},{}", r.iter, r.j, r.m, r.p, r.kkt, r.step, r.backtracks).unwrap();
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    /// `∂Ω_{u*}` with the annulus circles and markers at detected vertices.
    pub fn boundary_svg(&self) -> String {
        let size = 480.0;
        let b = self.annulus.outer.to_f64_lossy();
        let rmax = self.u.samples().iter().map(|x| 1.0 / x.to_f64_lossy()).fold(0.0, f64::max);
        let extent = if b.is_finite() { b.max(rmax) } else { rmax } * 1.1;
        let to_px = |x: f64, y: f64| (size / 2.0 + x / extent * size / 2.0, size / 2.0 - y / extent * size / 2.0);
        let circle = |r: f64| -> Vec<(f64, f64)> {
            (0..=256).map(|i| std::f64::consts::TAU * i as f64 / 256.0).map(|t| to_px(r * t.cos(), r * t.sin())).collect()
        };
        let mut svg = Svg::new(size, size);
        svg.polyline(&circle(self.annulus.inner.to_f64_lossy()), "#999", 1.0, true);
        if b.is_finite() {
            svg.polyline(&circle(b), "#999", 1.0, true);
        }
        let pts: Vec<(f64, f64)> = self
            .u
            .angles()
            .iter()
            .zip(self.u.samples())
            .map(|(t, x)| {
                let (t, r) = (t.to_f64_lossy(), 1.0 / x.to_f64_lossy());
                to_px(r * t.cos(), r * t.sin())
            })
            .collect();
        svg.polyline(&pts, PALETTE[0], 2.0, true);
        if let Some(poly) = &self.polygon {
            for v in &poly.vertices {
                let t = v.angle.to_f64_lossy();
                let r = 1.0 / self.u.eval(v.angle).to_f64_lossy();
                let (x, y) = to_px(r * t.cos(), r * t.sin());
                svg.circle(x, y, 4.0, PALETTE[1]);
            }
        }
        let j = self.trace.last().map_or(0.0, |r| r.j.to_f64_lossy());
        svg.text(10.0, 20.0, 13.0, "start", &format!("j = {j:.6}  vertices = {}", self.polygon.as_ref().map_or(0, |p| p.vertex_count())));
        svg.finish()
    }
}

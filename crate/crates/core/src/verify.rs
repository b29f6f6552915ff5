//! Growth of `|e'(v_k)|/‖v_k‖_{H^s}` and `|e''(v_k, v_k)|/‖v_k‖²_{H^s}` over
//! the mode family `v_k = cos kθ`, and the `H^{1/2}` coercivity probe.

use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{build_mesh, DiskMesh, EllipticProblem};
use crate::geometry::{cone_tolerance, convexity_residual, GaugeFunction};
use crate::plot::{loglog, Series};
use crate::shapecalc::validate::fit_slope;
use crate::shapecalc::{Method, ShapeContext, ShapeDerivatives, ShapeOptions};
use crate::sobolev::{arc_length, boundary_norm, hs_norm, PeriodicField};
use crate::Real;

/// Which `H^s` norm divides the derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormKind {
    /// Fourier multiplier norm on `𝕋`, exact for the mode family.
    #[default]
    Fourier,
    /// Gagliardo norm at `p = 2` on `∂Ω_u` in arc length; `s = 0` is the
    /// plain `L²(∂Ω_u)` norm.
    Boundary,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Fourier => "fourier",
            NormKind::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions<T> {
    pub domain: String,
    pub s_grid: Vec<T>,
    pub modes: Vec<usize>,
    /// Inclusive `k` range of the log-log fit.
    pub fit: (usize, usize),
    pub norm: NormKind,
    /// Repeat the fit range one mesh level finer.
    pub reference: bool,
    /// Random phases `cos(kθ + φ_k)` instead of pure cosines.
    pub seed: Option<u64>,
    pub shape: ShapeOptions<T>,
}

impl<T: Real> SweepOptions<T> {
    /// Modes `1..=k_max`, fit on the last octave, adjoint evaluation.
    pub fn new(s_grid: Vec<T>, k_max: usize) -> Self {
        Self {
            domain: "u".into(),
            s_grid,
            modes: (1..=k_max).collect(),
            fit: ((k_max / 2).max(1), k_max),
            norm: NormKind::Fourier,
            reference: false,
            seed: None,
            shape: ShapeOptions { method: Method::Adjoint, ..ShapeOptions::default() },
        }
    }

    pub fn k_max(&self) -> usize {
        self.modes.iter().copied().max().unwrap_or(0)
    }
}

/// Slopes of one `s` row.
#[derive(Clone, Copy, Debug)]
pub struct SlopeRow<T> {
    pub s: T,
    pub r1: Option<T>,
    pub r2: Option<T>,
    pub r1_reference: Option<T>,
    pub r2_reference: Option<T>,
}

/// Slopes closer than this across levels count as confirmed.
pub const CONFIRM_TOLERANCE: f64 = 0.1;

impl<T: Real> SlopeRow<T> {
    pub fn discrepancy_r1(&self) -> Option<T> {
        Some((self.r1? - self.r1_reference?).abs())
    }

    pub fn discrepancy_r2(&self) -> Option<T> {
        Some((self.r2? - self.r2_reference?).abs())
    }

    pub fn confirmed_r2(&self) -> bool {
        self.discrepancy_r2().is_some_and(|d| d < T::lit(CONFIRM_TOLERANCE))
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport<T> {
    pub domain: String,
    pub problem: String,
    pub level: usize,
    pub norm: NormKind,
    pub s_grid: Vec<T>,
    pub ks: Vec<usize>,
    pub phases: Vec<T>,
    pub de: Vec<T>,
    pub d2e: Vec<T>,
    /// `‖v_k‖_{H^s}`, indexed `[s][k]`.
    pub norms: Vec<Vec<T>>,
    pub r1: Vec<Vec<T>>,
    pub r2: Vec<Vec<T>>,
    pub fit: (usize, usize),
    pub slopes: Vec<SlopeRow<T>>,
    /// `e''` at the finer level on the fit range, when requested.
    pub reference_d2e: Option<Vec<T>>,
    /// Largest relative change of `e''` on the fit range between the two levels.
    pub floor: Option<T>,
    pub md_residual: f64,
}

/// Refuses mode numbers the gauge grid or the boundary mesh cannot carry.
pub fn check_resolution<T: Real>(u: &GaugeFunction<T>, mesh: &DiskMesh<T>, k_max: usize) -> Result<()> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    if 8 * k_max > u.n() {
        return Err(Error::UnderResolved(format!(
            "k_max = {k_max} exceeds n/8 = {} (rule: k_max <= n/8)",
            u.n() / 8
        )));
    }
    let nb = mesh.boundary_len();
    if 8 * k_max > nb {
        return Err(Error::UnderResolved(format!(
            "mesh level {} has boundary element angle 2π/{nb} > 2π/(8·k_max) = 2π/{} (rule: boundary element size <= 2π/(8·k_max))",
            mesh.level(),
            8 * k_max
        )));
    }
    Ok(())
}

fn mode_samples<T: Real>(n: usize, k: usize, phase: T) -> Vec<T> {
    let kk = T::from_usize_lossy(k);
    crate::spectral::grid::<T>(n).into_iter().map(|t| (kk * t + phase).cos()).collect()
}

fn mode_norm<T: Real>(kind: NormKind, v: &[T], u: &GaugeFunction<T>, s: T) -> Result<T> {
    let field = PeriodicField::new(v.to_vec())?;
    match kind {
        NormKind::Fourier => hs_norm(&field, s),
        NormKind::Boundary if s == T::zero() => {
            let (_, speed, _) = arc_length(u);
            let h = u.h();
            Ok(v.iter().zip(&speed).map(|(&x, &sp)| x * x * sp * h).sum::<T>().sqrt())
        }
        NormKind::Boundary => boundary_norm(&field, u, s, T::lit(2.0)),
    }
}

fn derivatives_at<T: Real>(
    prob: &EllipticProblem<T>,
    u: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    dirs: &[Vec<T>],
    opts: ShapeOptions<T>,
) -> Result<Vec<ShapeDerivatives<T>>> {
    let ctx = ShapeContext::new(prob, u, mesh, opts)?;
    if opts.method == Method::Adjoint {
        ctx.adjoint()?;
    }
    dirs.par_iter().map(|v| ctx.derivatives(v)).collect()
}

fn slope_on<T: Real>(ks: &[usize], r: &[T], fit: (usize, usize)) -> Option<T> {
    let (x, y): (Vec<T>, Vec<T>) =
        ks.iter().zip(r).filter(|(k, _)| (fit.0..=fit.1).contains(*k)).map(|(&k, &v)| (T::from_usize_lossy(k), v)).unzip();
    fit_slope(&x, &y)
}

fn phases<T: Real>(count: usize, seed: Option<u64>) -> Vec<T> {
    match seed {
        None => vec![T::zero(); count],
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| T::lit(rng.gen_range(0.0..std::f64::consts::TAU))).collect()
        }
    }
}

/// Ratio matrices over `opts.s_grid × opts.modes` with log-log slopes on the
/// fit range, optionally repeated one level finer.
pub fn ratio_sweep<T: Real>(
    prob: &EllipticProblem<T>,
    u: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    opts: &SweepOptions<T>,
) -> Result<SweepReport<T>> {
    if opts.modes.is_empty() || opts.modes.contains(&0) {
        return Err(Error::invalid("modes must be a nonempty list of positive integers"));
    }
    if opts.s_grid.is_empty() || opts.s_grid.iter().any(|s| !(*s >= T::zero() && *s <= T::one())) {
        return Err(Error::invalid("s grid must be nonempty and inside [0, 1]"));
    }
    if opts.norm == NormKind::Boundary && opts.s_grid.iter().any(|s| *s == T::one()) {
        return Err(Error::invalid("the boundary Gagliardo norm needs s < 1"));
    }
    if opts.fit.0 > opts.fit.1 {
        return Err(Error::invalid("empty fit range"));
    }
    check_resolution(u, mesh, opts.k_max())?;

    let n = u.n();
    let phases = phases::<T>(opts.modes.len(), opts.seed);
    let dirs: Vec<Vec<T>> = opts.modes.iter().zip(&phases).map(|(&k, &ph)| mode_samples(n, k, ph)).collect();
    let ders = derivatives_at(prob, u, mesh, &dirs, opts.shape)?;
    let de: Vec<T> = ders.iter().map(|d| d.de).collect();
    let d2e: Vec<T> = ders.iter().map(|d| d.d2e).collect();
    let mut md_residual = ders.iter().map(|d| d.md_residual).fold(0.0, f64::max);

    let norms: Vec<Vec<T>> = opts
        .s_grid
        .iter()
        .map(|&s| dirs.iter().map(|v| mode_norm(opts.norm, v, u, s)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let ratio = |vals: &[T], power: i32| -> Vec<Vec<T>> {
        norms.iter().map(|row| vals.iter().zip(row).map(|(d, nv)| d.abs() / nv.powi(power)).collect()).collect()
    };
    let r1 = ratio(&de, 1);
    let r2 = ratio(&d2e, 2);

    let in_fit: Vec<usize> = (0..opts.modes.len()).filter(|&i| (opts.fit.0..=opts.fit.1).contains(&opts.modes[i])).collect();
    if in_fit.len() < 2 {
        return Err(Error::invalid("fit range must contain at least two modes"));
    }
    let reference = if opts.reference {
        let fine = build_mesh::<T>(mesh.level() + 1)?;
        let fine_dirs: Vec<Vec<T>> = in_fit.iter().map(|&i| dirs[i].clone()).collect();
        let d = derivatives_at(prob, u, &fine, &fine_dirs, opts.shape)?;
        md_residual = d.iter().map(|x| x.md_residual).fold(md_residual, f64::max);
        Some(d)
    } else {
        None
    };
    let fit_ks: Vec<usize> = in_fit.iter().map(|&i| opts.modes[i]).collect();

    let slopes = opts
        .s_grid
        .iter()
        .enumerate()
        .map(|(si, &s)| {
            let (r1_reference, r2_reference) = match &reference {
                Some(d) => {
                    let a: Vec<T> = d.iter().zip(&in_fit).map(|(x, &i)| x.de.abs() / norms[si][i]).collect();
                    let b: Vec<T> = d.iter().zip(&in_fit).map(|(x, &i)| x.d2e.abs() / norms[si][i].powi(2)).collect();
                    (slope_on(&fit_ks, &a, opts.fit), slope_on(&fit_ks, &b, opts.fit))
                }
                None => (None, None),
            };
            SlopeRow {
                s,
                r1: slope_on(&opts.modes, &r1[si], opts.fit),
                r2: slope_on(&opts.modes, &r2[si], opts.fit),
                r1_reference,
                r2_reference,
            }
        })
        .collect();

    let floor = reference.as_ref().map(|d| {
        d.iter()
            .zip(&in_fit)
            .map(|(x, &i)| (d2e[i] - x.d2e).abs() / x.d2e.abs().max(T::min_positive_value()))
            .fold(T::zero(), T::max)
    });

    Ok(SweepReport {
        domain: opts.domain.clone(),
        problem: prob.name.clone(),
        level: mesh.level(),
        norm: opts.norm,
        s_grid: opts.s_grid.clone(),
        ks: opts.modes.clone(),
        phases,
        de,
        d2e,
        norms,
        r1,
        r2,
        fit: opts.fit,
        slopes,
        reference_d2e: reference.map(|d| d.iter().map(|x| x.d2e).collect()),
        floor,
        md_residual,
    })
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl<T: Real> SweepReport<T> {
    /// `# sweep v1`, then one `s,k,phase,norm,de,d2e,r1,r2` row per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        writeln!(
            s,
            "# sweep v1 domain={} problem={} level={} norm={}",
            self.domain,
            self.problem,
            self.level,
            self.norm.name()
        )
        .unwrap();
        s.push_str("s,k,phase,norm,de,d2e,r1,r2\n");
        for (si, sv) in self.s_grid.iter().enumerate() {
            for (ki, k) in self.ks.iter().enumerate() {
                writeln!(
                    s,
                    "{sv},{k},{},{},{},{},{},{}",
                    self.phases[ki], self.norms[si][ki], self.de[ki], self.d2e[ki], self.r1[si][ki], self.r2[si][ki]
                )
                .unwrap();
            }
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    /// `# sweep_slopes v1`, one row per `s`; empty fields where a slope is
    /// undefined or no reference level was run.
    pub fn write_slopes_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "# sweep_slopes v1 fit={}..{} floor={}", self.fit.0, self.fit.1, opt(self.floor)).unwrap();
        s.push_str("s,slope_r1,slope_r2,reference_slope_r1,reference_slope_r2,discrepancy_r1,discrepancy_r2,confirmed\n");
        for r in &self.slopes {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.s,
                opt(r.r1),
                opt(r.r2),
                opt(r.r1_reference),
                opt(r.r2_reference),
                opt(r.discrepancy_r1()),
                opt(r.discrepancy_r2()),
                r.confirmed_r2()
            )
            .unwrap();
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Log-log plot of `R1` and `R2` against `k` for one `s` row.
    pub fn svg(&self, s_index: usize) -> String {
        let pts = |r: &[T]| self.ks.iter().zip(r).map(|(&k, v)| (k as f64, v.to_f64_lossy())).collect();
        let s = self.s_grid[s_index].to_f64_lossy();
        loglog(
            &format!("{} / {}: ratios at s = {s}", self.domain, self.problem),
            "k",
            &[
                Series { label: "|e'| / |v|", points: pts(&self.r1[s_index]) },
                Series { label: "|e''| / |v|^2", points: pts(&self.r2[s_index]) },
            ],
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeOptions<T> {
    pub norm: NormKind,
    pub shape: ShapeOptions<T>,
    /// Allowed relative change of the minimum between the two levels.
    pub stability: T,
}

impl<T: Real> Default for ProbeOptions<T> {
    fn default() -> Self {
        Self {
            norm: NormKind::Fourier,
            shape: ShapeOptions { method: Method::Adjoint, ..ShapeOptions::default() },
            stability: T::lit(0.2),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeLevel<T> {
    pub level: usize,
    /// `e''(v_k, v_k) / ‖v_k‖²_{H^{1/2}}`, signed.
    pub values: Vec<T>,
    pub min: T,
    pub argmin: usize,
}

impl<T: Real> ProbeLevel<T> {
    fn new(level: usize, ks: &[usize], values: Vec<T>) -> Self {
        let (i, &min) = values.iter().enumerate().fold((0, &values[0]), |a, b| if *b.1 < *a.1 { b } else { a });
        Self { level, min, argmin: ks[i], values }
    }
}

#[derive(Clone, Debug)]
pub struct CoercivityReport<T> {
    pub ks: Vec<usize>,
    /// `‖ξ¹·n‖ / ‖ξ¹‖` in `L²(∂Ω_u)`; one on the disk.
    pub normal_fraction: Vec<T>,
    pub coarse: ProbeLevel<T>,
    pub fine: ProbeLevel<T>,
    pub relative_change: T,
    /// Both minima positive and within the stability band.
    pub bounded: bool,
}

fn normal_fraction<T: Real>(u: &GaugeFunction<T>, v: &[T]) -> T {
    let du = u.derivative(1);
    let (_, speed, _) = arc_length(u);
    let (mut num, mut den) = (T::zero(), T::zero());
    for i in 0..u.n() {
        let a = u.samples()[i];
        let xi = v[i] / (a * a);
        let cos = a / (a * a + du[i] * du[i]).sqrt();
        num += xi * xi * cos * cos * speed[i];
        den += xi * xi * speed[i];
    }
    if den == T::zero() {
        T::zero()
    } else {
        (num / den).sqrt()
    }
}

/// `min_{1≤k≤k_max} e''(v_k, v_k)/‖v_k‖²_{H^{1/2}}` at the mesh level and one
/// level finer.
pub fn coercivity_probe<T: Real>(
    prob: &EllipticProblem<T>,
    u: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    k_max: usize,
    opts: ProbeOptions<T>,
) -> Result<CoercivityReport<T>> {
    check_resolution(u, mesh, k_max)?;
    if convexity_residual(u).min_weak() < -cone_tolerance(u) {
        return Err(Error::invalid("the coercivity probe needs a convex gauge"));
    }
    let bnodes = mesh.map_nodes(u);
    let tol = T::lit(1e3) * T::epsilon();
    if let Some(&b) = mesh.boundary().iter().find(|&&b| prob.f.value(bnodes[b]).abs() > tol) {
        return Err(Error::invalid(format!(
            "source must vanish on the boundary (f = {} at boundary node {b})",
            prob.f.value(bnodes[b])
        )));
    }
    let ks: Vec<usize> = (1..=k_max).collect();
    let dirs: Vec<Vec<T>> = ks.iter().map(|&k| mode_samples(u.n(), k, T::zero())).collect();
    let half = T::lit(0.5);
    let norms: Vec<T> = dirs.iter().map(|v| mode_norm(opts.norm, v, u, half)).collect::<Result<_>>()?;
    let level_values = |m: &DiskMesh<T>| -> Result<Vec<T>> {
        let d = derivatives_at(prob, u, m, &dirs, opts.shape)?;
        Ok(d.iter().zip(&norms).map(|(x, nv)| x.d2e / (*nv * *nv)).collect())
    };
    let coarse = ProbeLevel::new(mesh.level(), &ks, level_values(mesh)?);
    let fine_mesh = build_mesh::<T>(mesh.level() + 1)?;
    let fine = ProbeLevel::new(fine_mesh.level(), &ks, level_values(&fine_mesh)?);
    let relative_change = (coarse.min - fine.min).abs() / fine.min.abs().max(T::min_positive_value());
    let bounded = coarse.min > T::zero() && fine.min > T::zero() && relative_change <= opts.stability;
    Ok(CoercivityReport {
        normal_fraction: dirs.iter().map(|v| normal_fraction(u, v)).collect(),
        ks,
        coarse,
        fine,
        relative_change,
        bounded,
    })
}

impl<T: Real> CoercivityReport<T> {
    /// `# coercivity v1`, then `k,normal_fraction,ratio_coarse,ratio_fine` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        writeln!(
            s,
            "# coercivity v1 levels={},{} min={},{} relative_change={} bounded={}",
            self.coarse.level, self.fine.level, self.coarse.min, self.fine.min, self.relative_change, self.bounded
        )
        .unwrap();
        s.push_str("k,normal_fraction,ratio_coarse,ratio_fine\n");
        for (i, k) in self.ks.iter().enumerate() {
            writeln!(s, "{k},{},{},{}", self.normal_fraction[i], self.coarse.values[i], self.fine.values[i]).unwrap();
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }
}

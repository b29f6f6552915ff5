//! One-call derivatives and their finite-difference validation by re-solving
//! on moved meshes.

use std::io::Write;
use std::sync::Arc;

use super::derivatives::{ShapeContext, ShapeDerivatives, ShapeOptions};
use crate::error::{Error, Result};
use crate::fem::state::solve_on;
use crate::fem::{DiskMesh, EllipticProblem};
use crate::geometry::GaugeFunction;
use crate::Real;

/// `e(u)`, `e'(u)(v)` and `e''(u)(v, v)` with all constituents.
pub fn shape_derivatives<T: Real>(
    prob: &EllipticProblem<T>,
    u: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    v: &[T],
    opts: ShapeOptions<T>,
) -> Result<ShapeDerivatives<T>> {
    ShapeContext::new(prob, u, mesh, opts)?.derivatives(v)
}

#[derive(Clone, Copy, Debug)]
pub struct FdRow<T> {
    pub t: T,
    /// Energy re-solved on the mesh moved along the path to `u + tv`.
    pub energy: T,
    /// `|E(t) − E − t e'|`.
    pub remainder1: T,
    /// `|E(t) − E − t e' − t² e''/2|`.
    pub remainder2: T,
}

#[derive(Clone, Debug)]
pub struct FdReport<T> {
    pub derivatives: ShapeDerivatives<T>,
    pub rows: Vec<FdRow<T>>,
    /// Least-squares slope of `log remainder1` against `log t`; `None` when
    /// fewer than two remainders are nonzero.
    pub slope1: Option<T>,
    pub slope2: Option<T>,
    /// Round-off level of the energy differences.
    pub floor: T,
    /// Some remainder sits at the floor or the local order collapses at the
    /// smallest steps.
    pub plateau: bool,
}

pub(crate) fn fit_slope<T: Real>(ts: &[T], rs: &[T]) -> Option<T> {
    let pts: Vec<(T, T)> = ts.iter().zip(rs).filter(|(_, r)| **r > T::zero()).map(|(t, r)| (t.ln(), r.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Re-solves on `Ω_{u+tv}` for every step and fits remainder orders.
pub fn fd_validate<T: Real>(
    prob: &EllipticProblem<T>,
    u: &GaugeFunction<T>,
    mesh: &DiskMesh<T>,
    v: &[T],
    steps: &[T],
    opts: ShapeOptions<T>,
) -> Result<FdReport<T>> {
    if steps.is_empty() || steps.iter().any(|t| !(*t > T::zero())) {
        return Err(Error::invalid("finite-difference steps must be positive"));
    }
    if steps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("finite-difference steps must be decreasing"));
    }
    let ctx = ShapeContext::new(prob, u, mesh, opts)?;
    let d = ctx.derivatives(v)?;
    let field = ctx.field(v)?;
    let base = &ctx.state().mesh;
    let half = T::lit(0.5);
    let mut rows = Vec::with_capacity(steps.len());
    for &t in steps {
        let moved = Arc::new(base.displaced(&field.path(mesh, t))?);
        let e = solve_on(prob, moved, &opts.krylov)?.energy;
        let lin = e - d.energy - t * d.de;
        rows.push(FdRow { t, energy: e, remainder1: lin.abs(), remainder2: (lin - half * t * t * d.d2e).abs() });
    }
    let ts: Vec<T> = rows.iter().map(|r| r.t).collect();
    let r1: Vec<T> = rows.iter().map(|r| r.remainder1).collect();
    let r2: Vec<T> = rows.iter().map(|r| r.remainder2).collect();
    let scale = d.energy.abs().max(d.de.abs()).max(d.d2e.abs()).max(T::min_positive_value());
    let floor = T::lit(1e3) * T::epsilon() * scale;
    let exact = r1.iter().chain(&r2).all(|r| *r == T::zero());
    let mut plateau = !exact && r1.iter().chain(&r2).any(|r| *r <= floor);
    if !exact && rows.len() >= 2 {
        let k = rows.len() - 1;
        let local = |r: &[T]| (r[k - 1].ln() - r[k].ln()) / (ts[k - 1].ln() - ts[k].ln());
        if local(&r1) < T::one() || local(&r2) < T::lit(2.0) {
            plateau = true;
        }
    }
    Ok(FdReport { derivatives: d, rows, slope1: fit_slope(&ts, &r1), slope2: fit_slope(&ts, &r2), floor, plateau })
}

impl<T: Real> FdReport<T> {
    /// `# fd_validate v1`, then `t,energy,remainder1,remainder2` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# fd_validate v1")?;
        writeln!(w, "t,energy,remainder1,remainder2")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.t, r.energy, r.remainder1, r.remainder2)?;
        }
        Ok(())
    }
}

/// `# derivatives v1` table with one row per `(u, v)` pair.
pub fn write_derivative_csv<T: Real, W: Write>(rows: &[(String, String, ShapeDerivatives<T>)], mut w: W) -> Result<()> {
    writeln!(w, "# derivatives v1")?;
    writeln!(w, "u_id,v_id,E,dE,d2E,E2_xi1,E1_xi2,md_residual,xi_w1inf")?;
    for (uid, vid, d) in rows {
        writeln!(
            w,
            "{uid},{vid},{},{},{},{},{},{:e},{}",
            d.energy, d.de, d.d2e, d.e2_xi1, d.e1_xi2, d.md_residual, d.xi_w1inf
        )?;
    }
    Ok(())
}

//! Euclidean projection onto the discrete admissible set
//! `{D²u + u ≥ 0} ∩ {1/b ≤ u ≤ 1/a}` by a primal-dual interior-point method.

use crate::error::{Error, Result};
use crate::geometry::{convexity_residual, GaugeFunction};
use crate::linalg::SkylineMatrix;
use crate::Real;

/// Radial constraint `a ≤ |x| ≤ b` on `∂Ω`, i.e. `1/b ≤ u ≤ 1/a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Annulus<T> {
    pub inner: T,
    /// `+∞` drops the lower bound on `u`.
    pub outer: T,
}

impl<T: Real> Annulus<T> {
    /// Requires `0 < a ≤ b`; `a = b` is the singleton set `u ≡ 1/a`.
    pub fn new(inner: T, outer: T) -> Result<Self> {
        if !(inner > T::zero()) || !inner.is_finite() {
            return Err(Error::invalid(format!("inner radius a={inner} must be positive and finite")));
        }
        if !(outer >= inner) {
            return Err(Error::Infeasible(format!("inner radius a={inner} exceeds outer radius b={outer}")));
        }
        Ok(Self { inner, outer })
    }

    pub fn u_upper(&self) -> T {
        T::one() / self.inner
    }

    /// `0` when `b = ∞`, i.e. no lower bound beyond positivity.
    pub fn u_lower(&self) -> Option<T> {
        if self.outer.is_finite() {
            Some(T::one() / self.outer)
        } else {
            None
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.inner == self.outer
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectionOptions {
    /// Relative KKT tolerance of the interior-point iteration.
    pub kkt_tol: f64,
    pub max_iter: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { kkt_tol: 1e-10, max_iter: 200 }
    }
}

fn is_admissible<T: Real>(u: &GaugeFunction<T>, ann: &Annulus<T>) -> bool {
    let res = convexity_residual(u);
    let tol = res.tol;
    res.convex
        && u.samples().iter().all(|&x| {
            x <= ann.u_upper() + tol && ann.u_lower().is_none_or(|lo| x >= lo - tol)
        })
}

/// Projects the samples of `u` onto the admissible set. Admissible input is
/// returned unchanged.
pub fn project_admissible<T: Real>(
    u: &GaugeFunction<T>,
    ann: &Annulus<T>,
    opts: &ProjectionOptions,
) -> Result<GaugeFunction<T>> {
    if ann.is_singleton() {
        return GaugeFunction::constant(u.n(), ann.u_upper());
    }
    if is_admissible(u, ann) {
        return Ok(u.clone());
    }
    project_samples(u.samples(), ann, opts)
}

/// Projection of arbitrary (possibly nonpositive) nodal values.
pub fn project_samples<T: Real>(y: &[T], ann: &Annulus<T>, opts: &ProjectionOptions) -> Result<GaugeFunction<T>> {
    if ann.is_singleton() {
        return GaugeFunction::constant(y.len(), ann.u_upper());
    }
    if let Ok(u) = GaugeFunction::new(y.to_vec()) {
        if is_admissible(&u, ann) {
            return Ok(u);
        }
    }
    let x = interior_point(y, ann, opts)?;
    GaugeFunction::new(x)
}

/// Constraint rows in the scaled form `G x ≥ g`:
/// rows `0..n` are `u_{i-1} + (h² − 2) u_i + u_{i+1} ≥ 0`, then `u ≤ 1/a`, then
/// (optionally) `u ≥ 1/b`.
struct Constraints<T> {
    n: usize,
    diag: T,
    upper: T,
    lower: Option<T>,
}

impl<T: Real> Constraints<T> {
    fn m(&self) -> usize {
        2 * self.n + usize::from(self.lower.is_some())* self.n
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.m());
        for i in 0..n {
            out.push(x[(i + n - 1) % n] + self.diag * x[i] + x[(i + 1) % n]);
        }
        out.extend(x.iter().map(|&v| -v));
        if self.lower.is_some() {
            out.extend_from_slice(x);
        }
        out
    }

    fn rhs(&self) -> Vec<T> {
        let mut g = vec![T::zero(); self.n];
        g.extend(std::iter::repeat_n(-self.upper, self.n));
        if let Some(lo) = self.lower {
            g.extend(std::iter::repeat_n(lo, self.n));
        }
        g
    }

    fn apply_transpose(&self, z: &[T]) -> Vec<T> {
        let n = self.n;
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            // row i touches i-1, i, i+1
            out[(i + n - 1) % n] += z[i];
            out[i] += self.diag * z[i];
            out[(i + 1) % n] += z[i];
        }
        for i in 0..n {
            out[i] -= z[n + i];
        }
        if self.lower.is_some() {
            for i in 0..n {
                out[i] += z[2 * n + i];
            }
        }
        out
    }

    /// `I + Gᵀ diag(w) G` as a cyclic pentadiagonal envelope matrix, factored.
    fn normal_matrix(&self, w: &[T]) -> Result<SkylineMatrix<T>> {
        let n = self.n;
        let mut first: Vec<usize> = (0..n).map(|i| i.saturating_sub(2)).collect();
        first[n - 2] = 0;
        first[n - 1] = 0;
        let mut m = SkylineMatrix::new(first);
        for i in 0..n {
            m.add(i, i, T::one() + w[n + i] + if self.lower.is_some() { w[2 * n + i] } else { T::zero() });
        }
        for r in 0..n {
            let idx = [(r + n - 1) % n, r, (r + 1) % n];
            let coef = [T::one(), self.diag, T::one()];
            for a in 0..3 {
                for b in 0..=a {
                    let (i, j) = (idx[a], idx[b]);
                    let v = w[r] * coef[a] * coef[b];
                    if i == j && a != b {
                        m.add(i, i, v + v);
                    } else {
                        m.add(i, j, v);
                    }
                }
            }
        }
        // Near-null cone rows (D² + 1 almost annihilates cos θ, sin θ) make the
        // matrix numerically singular once their barrier weights blow up.
        m.factor_guarded(T::lit(1e3) * T::epsilon())?;
        Ok(m)
    }
}

/// Iterations without merit improvement before a stalled run is cut short.
const STALL: usize = 5;
/// Largest merit (residual over tolerance) accepted from a stalled run.
const ACCEPT: f64 = 1e2;

fn interior_point<T: Real>(y: &[T], ann: &Annulus<T>, opts: &ProjectionOptions) -> Result<Vec<T>> {
    let n = y.len();
    let h = T::two_pi() / T::from_usize_lossy(n);
    let cons = Constraints { n, diag: h * h - T::lit(2.0), upper: ann.u_upper(), lower: ann.u_lower() };
    let m = cons.m();
    let g = cons.rhs();
    let scale = T::one().max(y.iter().fold(T::zero(), |a, v| a.max(v.abs())));
    let tol = T::lit(opts.kkt_tol) * scale;

    let mut x: Vec<T> = y.to_vec();
    let mut s: Vec<T> = cons.apply(&x).iter().zip(&g).map(|(a, b)| (*a - *b).max(T::one())).collect();
    let mut z = vec![T::one(); m];
    let frac = T::lit(0.995);
    let mut best = (x.clone(), T::infinity(), 0usize);

    for _ in 0..opts.max_iter {
        let gx = cons.apply(&x);
        let gtz = cons.apply_transpose(&z);
        let r_d: Vec<T> = (0..n).map(|i| x[i] - y[i] - gtz[i]).collect();
        let r_p: Vec<T> = (0..m).map(|i| gx[i] - s[i] - g[i]).collect();
        let mu = s.iter().zip(&z).map(|(a, b)| *a * *b).sum::<T>() / T::from_usize_lossy(m);
        let inf = |v: &[T]| v.iter().fold(T::zero(), |a, b| a.max(b.abs()));
        let merit = (inf(&r_d) / tol).max(inf(&r_p) / tol).max(mu / (tol * T::lit(1e-2)));
        if merit <= T::one() {
            return Ok(x);
        }
        if merit < best.1 {
            best = (x.clone(), merit, 0);
        } else {
            best.2 += 1;
            // Ill-conditioning has stopped progress; settle for a near-optimal iterate.
            if best.2 >= STALL && best.1 <= T::lit(ACCEPT) {
                return Ok(best.0);
            }
        }

        let w: Vec<T> = z.iter().zip(&s).map(|(a, b)| *a / *b).collect();
        let kkt = cons.normal_matrix(&w)?;

        let solve = |rc: &[T]| -> (Vec<T>, Vec<T>, Vec<T>) {
            // Δx from (I + GᵀWG)Δx = −r_d + Gᵀ S⁻¹(r_c − Z r_p)
            let t: Vec<T> = (0..m).map(|i| (rc[i] - z[i] * r_p[i]) / s[i]).collect();
            let gt = cons.apply_transpose(&t);
            let rhs: Vec<T> = (0..n).map(|i| -r_d[i] + gt[i]).collect();
            let mut dx = kkt.solve(&rhs);
            // one refinement step against the unfactored operator
            let gdx = cons.apply(&dx);
            let wg: Vec<T> = gdx.iter().zip(&w).map(|(a, b)| *a * *b).collect();
            let back = cons.apply_transpose(&wg);
            let res: Vec<T> = (0..n).map(|i| rhs[i] - dx[i] - back[i]).collect();
            for (d, c) in dx.iter_mut().zip(kkt.solve(&res)) {
                *d += c;
            }
            let gdx = cons.apply(&dx);
            let ds: Vec<T> = (0..m).map(|i| gdx[i] + r_p[i]).collect();
            let dz: Vec<T> = (0..m).map(|i| (rc[i] - z[i] * ds[i]) / s[i]).collect();
            (dx, ds, dz)
        };
        let step_to_boundary = |v: &[T], dv: &[T]| {
            v.iter().zip(dv).fold(T::one(), |a, (&vi, &di)| if di < T::zero() { a.min(-vi / di) } else { a })
        };

        // predictor
        let rc_aff: Vec<T> = (0..m).map(|i| -s[i] * z[i]).collect();
        let (_, ds_a, dz_a) = solve(&rc_aff);
        let a_p = step_to_boundary(&s, &ds_a);
        let a_d = step_to_boundary(&z, &dz_a);
        let mu_aff = (0..m).map(|i| (s[i] + a_p * ds_a[i]) * (z[i] + a_d * dz_a[i])).sum::<T>()
            / T::from_usize_lossy(m);
        let sigma = (mu_aff / mu).powi(3).min(T::one());

        // corrector
        let rc: Vec<T> = (0..m).map(|i| -s[i] * z[i] + sigma * mu - ds_a[i] * dz_a[i]).collect();
        let (dx, ds, dz) = solve(&rc);
        let alpha = (frac * step_to_boundary(&s, &ds).min(step_to_boundary(&z, &dz))).min(T::one());
        for i in 0..n {
            x[i] += alpha * dx[i];
        }
        for i in 0..m {
            s[i] += alpha * ds[i];
            z[i] += alpha * dz[i];
        }
    }
    if best.1 <= T::lit(ACCEPT) {
        return Ok(best.0);
    }
    Err(Error::NotConverged {
        solver: "projection interior point",
        iterations: opts.max_iter,
        residual: (best.1 * tol).to_f64_lossy(),
        history: Vec::new(),
    })
}

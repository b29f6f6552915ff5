use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, CsrMatrix};
use crate::Real;

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    /// Relative residual target `‖b − Ax‖ ≤ rtol ‖b‖`.
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, max_iter: 20_000 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Zero-fill incomplete Cholesky factor `A ≈ L Lᵀ` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct IncompleteCholesky<T> {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> IncompleteCholesky<T> {
    /// Fails with [`Error::Breakdown`] on a non-positive pivot.
    pub fn new(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.n();
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<T> = Vec::new();
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if j <= i {
                    cols.push(j);
                    vals.push(x);
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        for i in 0..n {
            let (start, end) = (row_ptr[i], row_ptr[i + 1]);
            for p in start..end {
                let k = cols[p];
                // Σ_{j<k} L_ij L_kj over the shared pattern
                let (ks, ke) = (row_ptr[k], row_ptr[k + 1]);
                let mut s = T::zero();
                let (mut a_i, mut a_k) = (start, ks);
                while a_i < p && a_k < ke {
                    let (ci, ck) = (cols[a_i], cols[a_k]);
                    if ci >= k || ck >= k {
                        break;
                    }
                    match ci.cmp(&ck) {
                        std::cmp::Ordering::Less => a_i += 1,
                        std::cmp::Ordering::Greater => a_k += 1,
                        std::cmp::Ordering::Equal => {
                            s += vals[a_i] * vals[a_k];
                            a_i += 1;
                            a_k += 1;
                        }
                    }
                }
                if k == i {
                    let d = vals[p] - s;
                    if !(d > T::zero()) {
                        return Err(Error::Breakdown("incomplete Cholesky"));
                    }
                    vals[p] = d.sqrt();
                } else {
                    let lkk = vals[ke - 1];
                    vals[p] = (vals[p] - s) / lkk;
                }
            }
        }
        Ok(Self { row_ptr, cols, vals })
    }

    pub fn apply(&self, r: &[T], z: &mut [T]) {
        let n = r.len();
        for i in 0..n {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = r[i];
            for p in s..e - 1 {
                acc -= self.vals[p] * z[self.cols[p]];
            }
            z[i] = acc / self.vals[e - 1];
        }
        for i in (0..n).rev() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            z[i] /= self.vals[e - 1];
            let zi = z[i];
            for p in s..e - 1 {
                z[self.cols[p]] -= self.vals[p] * zi;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Preconditioner<T> {
    Identity,
    Jacobi(Vec<T>),
    IncompleteCholesky(IncompleteCholesky<T>),
}

impl<T: Real> Preconditioner<T> {
    /// IC(0) of `a`, falling back to Jacobi when the factorization breaks down.
    pub fn for_symmetric(a: &CsrMatrix<T>) -> Self {
        match IncompleteCholesky::new(a) {
            Ok(ic) => Self::IncompleteCholesky(ic),
            Err(_) => Self::jacobi(a),
        }
    }

    pub fn jacobi(a: &CsrMatrix<T>) -> Self {
        Self::Jacobi(
            a.diagonal()
                .into_iter()
                .map(|d| if d != T::zero() { T::one() / d } else { T::one() })
                .collect(),
        )
    }

    pub fn apply(&self, r: &[T], z: &mut [T]) {
        match self {
            Self::Identity => z.copy_from_slice(r),
            Self::Jacobi(d) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                    *zi = *ri * *di;
                }
            }
            Self::IncompleteCholesky(ic) => ic.apply(r, z),
        }
    }
}

/// Requested tolerance, floored near the scalar's round-off level so that
/// single precision runs can terminate.
fn effective_rtol<T: Real>(rtol: f64) -> T {
    T::lit(rtol).max(T::epsilon() * T::lit(50.0))
}

/// Preconditioned conjugate gradients for symmetric positive definite `a`.
pub fn pcg<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    pre: &Preconditioner<T>,
    opts: &KrylovOptions,
) -> Result<(Vec<T>, SolveStats)> {
    let n = a.n();
    let bnorm = norm2(b);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], SolveStats::default()));
    }
    let tol = effective_rtol::<T>(opts.rtol) * bnorm;
    let mut r = a.mul_vec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
    let mut z = vec![T::zero(); n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let mut history = Vec::new();
    let mut rnorm = norm2(&r);
    for it in 0..opts.max_iter {
        history.push((rnorm / bnorm).to_f64_lossy());
        if rnorm <= tol {
            return Ok((x, SolveStats { iterations: it, residual: (rnorm / bnorm).to_f64_lossy(), history }));
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::Breakdown("conjugate gradients (operator not positive definite)"));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = norm2(&r);
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = (rnorm / bnorm).to_f64_lossy();
    Err(Error::NotConverged { solver: "conjugate gradients", iterations: opts.max_iter, residual, history })
}

/// Right-preconditioned BiCGSTAB for general (non-symmetric) `a`.
pub fn bicgstab<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    pre: &Preconditioner<T>,
    opts: &KrylovOptions,
) -> Result<(Vec<T>, SolveStats)> {
    let n = a.n();
    let bnorm = norm2(b);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], SolveStats::default()));
    }
    let tol = effective_rtol::<T>(opts.rtol) * bnorm;
    let mut r = a.mul_vec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let mut zv = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let mut history = Vec::new();
    let mut rnorm = norm2(&r);
    for it in 0..opts.max_iter {
        history.push((rnorm / bnorm).to_f64_lossy());
        if rnorm <= tol {
            return Ok((x, SolveStats { iterations: it, residual: (rnorm / bnorm).to_f64_lossy(), history }));
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == T::zero() || omega == T::zero() {
            return Err(Error::Breakdown("BiCGSTAB"));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pre.apply(&p, &mut y);
        a.mul_vec_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == T::zero() {
            return Err(Error::Breakdown("BiCGSTAB"));
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            r.copy_from_slice(&s);
            rnorm = norm2(&r);
            continue;
        }
        pre.apply(&s, &mut zv);
        a.mul_vec_into(&zv, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > T::zero() { dot(&t, &s) / tt } else { T::zero() };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zv[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm2(&r);
    }
    let residual = (rnorm / bnorm).to_f64_lossy();
    Err(Error::NotConverged { solver: "BiCGSTAB", iterations: opts.max_iter, residual, history })
}

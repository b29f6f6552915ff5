//! Fractional Sobolev norms on the circle and on star-shaped boundaries.
//!
//! `H^s` uses the Fourier multiplier convention
//! `‖v‖²_{H^s} = 2π Σ_k (1 + k²)^s |ĉ_k|²`. `W^{s,p}` uses the Gagliardo form
//! `‖v‖^p_{L^p} + ∬ |v(θ) − v(φ)|^p / d(θ, φ)^{1+sp}` with the diagonal cell
//! of the tensor-trapezoid rule left out.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::GaugeFunction;
use crate::spectral;
use crate::Real;

/// Real samples on the uniform circle grid with cached Fourier coefficients.
#[derive(Clone, Debug)]
pub struct PeriodicField<T> {
    samples: Vec<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> PeriodicField<T> {
    pub fn new(samples: Vec<T>) -> Result<Self> {
        if samples.len() < 2 || !samples.len().is_multiple_of(2) {
            return Err(Error::invalid(format!("periodic field needs an even grid, got {}", samples.len())));
        }
        let coeffs = spectral::forward(&samples);
        Ok(Self { samples, coeffs })
    }

    pub fn from_fn(n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(spectral::grid(n).into_iter().map(f).collect())
    }

    /// `cos(kθ)` sampled on `n` points.
    pub fn cosine_mode(n: usize, k: usize) -> Result<Self> {
        let kk = T::from_usize_lossy(k);
        Self::from_fn(n, |t| (kk * t).cos())
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    /// Coefficients in FFT order.
    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            samples: self.samples.iter().map(|&v| v * alpha).collect(),
            coeffs: self.coeffs.iter().map(|c| c.scale(alpha)).collect(),
        }
    }
}

fn check_s_unit<T: Real>(s: T) -> Result<()> {
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::invalid(format!("Sobolev order s={s} outside [0, 1]")));
    }
    Ok(())
}

fn check_gagliardo<T: Real>(s: T, p: T) -> Result<()> {
    if !(s > T::zero() && s < T::one()) {
        return Err(Error::invalid(format!("fractional order s={s} outside (0, 1)")));
    }
    if !(p >= T::one() && p <= T::lit(64.0)) {
        return Err(Error::invalid(format!("integrability p={p} outside [1, 64]")));
    }
    if s * p >= p + T::one() {
        return Err(Error::invalid("sp >= p + 1 is not supported"));
    }
    Ok(())
}

/// Fourier-multiplier `H^s(𝕋)` norm, `s ∈ [0, 1]`.
pub fn hs_norm<T: Real>(v: &PeriodicField<T>, s: T) -> Result<T> {
    check_s_unit(s)?;
    let n = v.n();
    let acc: T = v
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let k = T::from_i64(spectral::wavenumber(idx, n)).unwrap();
            (T::one() + k * k).powf(s) * c.norm_sqr()
        })
        .sum();
    Ok((T::two_pi() * acc).sqrt())
}

/// The two pieces of a Gagliardo norm, both raised to the power `p`.
#[derive(Clone, Copy, Debug)]
pub struct GagliardoParts<T> {
    pub lp: T,
    pub seminorm: T,
}

impl<T: Real> GagliardoParts<T> {
    pub fn norm(&self, p: T) -> T {
        (self.lp + self.seminorm).powf(T::one() / p)
    }
}

/// Double sum `Σ_{i≠j} w_i w_j |v_i − v_j|^p / d_ij^{1+sp}`, accumulated per
/// row and reduced in index order.
fn double_sum<T: Real>(v: &[T], w: &[T], dist: impl Fn(usize, usize) -> T + Sync, s: T, p: T) -> T {
    let n = v.len();
    let expo = T::one() + s * p;
    let rows: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dv = (v[i] - v[j]).abs();
                if dv == T::zero() {
                    continue;
                }
                acc += w[j] * dv.powf(p) / dist(i, j).powf(expo);
            }
            acc * w[i]
        })
        .collect();
    rows.into_iter().sum()
}

pub fn gagliardo_parts<T: Real>(v: &PeriodicField<T>, s: T, p: T) -> Result<GagliardoParts<T>> {
    check_gagliardo(s, p)?;
    let n = v.n();
    let h = T::two_pi() / T::from_usize_lossy(n);
    let w = vec![h; n];
    let lp = v.samples.iter().map(|x| x.abs().powf(p)).sum::<T>() * h;
    let seminorm = double_sum(
        &v.samples,
        &w,
        |i, j| {
            let d = i.abs_diff(j);
            h * T::from_usize_lossy(d.min(n - d))
        },
        s,
        p,
    );
    Ok(GagliardoParts { lp, seminorm })
}

/// `W^{s,p}(𝕋)` Gagliardo norm with geodesic distance.
pub fn gagliardo_norm<T: Real>(v: &PeriodicField<T>, s: T, p: T) -> Result<T> {
    Ok(gagliardo_parts(v, s, p)?.norm(p))
}

/// Arc-length positions `s(θ_j)` along `∂Ω_u` and the total length, from
/// spectral integration of the speed `√(u² + u'²)/u²`.
pub fn arc_length<T: Real>(u: &GaugeFunction<T>) -> (Vec<T>, Vec<T>, T) {
    let n = u.n();
    let du = u.derivative(1);
    let speed: Vec<T> = u.samples().iter().zip(&du).map(|(&a, &b)| (a * a + b * b).sqrt() / (a * a)).collect();
    let mut c = spectral::forward(&speed);
    let mean = c[0].re;
    c[0] = Complex::new(T::zero(), T::zero());
    for (idx, ck) in c.iter_mut().enumerate() {
        let k = spectral::wavenumber(idx, n);
        if k == 0 || idx == n / 2 {
            *ck = Complex::new(T::zero(), T::zero());
        } else {
            // ∫ e^{ikθ} = e^{ikθ}/(ik)
            let ik = Complex::new(T::zero(), T::from_i64(k).unwrap());
            *ck = *ck / ik;
        }
    }
    let periodic = spectral::inverse(&c);
    let theta = u.angles();
    let s: Vec<T> = (0..n).map(|j| mean * theta[j] + periodic[j] - periodic[0]).collect();
    (s, speed, mean * T::two_pi())
}

/// Gagliardo norm on `∂Ω_u`: arc-length distance and arc-length measure.
pub fn boundary_parts<T: Real>(v: &PeriodicField<T>, u: &GaugeFunction<T>, s: T, p: T) -> Result<GagliardoParts<T>> {
    check_gagliardo(s, p)?;
    if v.n() != u.n() {
        return Err(Error::invalid("field and gauge grids differ"));
    }
    let h = u.h();
    let (pos, speed, length) = arc_length(u);
    let w: Vec<T> = speed.iter().map(|&sp| sp * h).collect();
    let lp = v.samples.iter().zip(&w).map(|(x, &wi)| x.abs().powf(p) * wi).sum::<T>();
    let seminorm = double_sum(
        &v.samples,
        &w,
        |i, j| {
            let d = (pos[i] - pos[j]).abs();
            d.min(length - d)
        },
        s,
        p,
    );
    Ok(GagliardoParts { lp, seminorm })
}

pub fn boundary_norm<T: Real>(v: &PeriodicField<T>, u: &GaugeFunction<T>, s: T, p: T) -> Result<T> {
    Ok(boundary_parts(v, u, s, p)?.norm(p))
}

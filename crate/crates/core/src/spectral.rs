//! Fourier tools on the uniform periodic grid `θ_j = 2πj/n`.
//!
//! Coefficients follow `v_j = Σ_k ĉ_k e^{ikθ_j}` with `ĉ_k = (1/n) Σ_j v_j e^{-ikθ_j}`.
//! The Nyquist mode `k = n/2` is treated as the real cosine `ĉ_{n/2} cos(nθ/2)`,
//! which makes interpolants of real data real.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::Real;

/// Normalized discrete Fourier coefficients of real samples, in FFT order
/// (`k = 0, 1, …, n/2, -(n/2-1), …, -1`).
pub fn forward<T: Real>(samples: &[T]) -> Vec<Complex<T>> {
    let n = samples.len();
    let mut buf: Vec<Complex<T>> = samples.iter().map(|&v| Complex::new(v, T::zero())).collect();
    if n == 0 {
        return buf;
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut buf);
    let inv_n = T::one() / T::from_usize_lossy(n);
    for c in &mut buf {
        *c = c.scale(inv_n);
    }
    buf
}

/// Inverse of [`forward`]; returns the real part.
pub fn inverse<T: Real>(coeffs: &[Complex<T>]) -> Vec<T> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    if n == 0 {
        return Vec::new();
    }
    let fft = FftPlanner::new().plan_fft_inverse(n);
    fft.process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Signed wavenumber of FFT slot `idx`.
#[inline]
pub fn wavenumber(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Spectral derivative of the given order of real periodic samples.
///
/// For odd orders the Nyquist coefficient is dropped (its derivative is not
/// representable by a real cosine at the grid points).
pub fn derivative<T: Real>(samples: &[T], order: u32) -> Vec<T> {
    let n = samples.len();
    let mut coeffs = forward(samples);
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let k = wavenumber(idx, n);
        if n.is_multiple_of(2) && idx == n / 2 && order % 2 == 1 {
            *c = Complex::new(T::zero(), T::zero());
            continue;
        }
        let ik = Complex::new(T::zero(), T::from_i64(k).unwrap());
        let mut factor = Complex::new(T::one(), T::zero());
        for _ in 0..order {
            factor = factor * ik;
        }
        *c = *c * factor;
    }
    inverse(&coeffs)
}

/// Band-limited trigonometric interpolant of real samples on the uniform grid.
#[derive(Clone, Debug)]
pub struct TrigInterpolant<T> {
    samples: Vec<T>,
    /// `ĉ_k` for `k = 0..=n/2`.
    half: Vec<Complex<T>>,
}

impl<T: Real> TrigInterpolant<T> {
    pub fn new(samples: &[T]) -> Self {
        let n = samples.len();
        let coeffs = forward(samples);
        let half = coeffs.into_iter().take(n / 2 + 1).collect();
        Self { samples: samples.to_vec(), half }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Grid index of `theta` when it lies on a grid angle.
    fn grid_index(&self, theta: T) -> Option<usize> {
        let n = self.samples.len();
        let pos = theta / T::two_pi() * T::from_usize_lossy(n);
        let r = pos.round();
        if (pos - r).abs() <= T::lit(1e-12) * T::from_usize_lossy(n).max(T::one()) {
            let idx = r.to_i64()?.rem_euclid(n as i64) as usize;
            Some(idx)
        } else {
            None
        }
    }

    /// Value at an arbitrary angle. Grid angles return the stored sample.
    pub fn eval(&self, theta: T) -> T {
        if let Some(i) = self.grid_index(theta) {
            return self.samples[i];
        }
        self.eval_series(theta, 0)
    }

    /// First angular derivative of the interpolant.
    pub fn eval_derivative(&self, theta: T) -> T {
        self.eval_series(theta, 1)
    }

    fn eval_series(&self, theta: T, order: u32) -> T {
        let n = self.samples.len();
        let nyq = n / 2;
        let two = T::lit(2.0);
        let step = Complex::new(theta.cos(), theta.sin());
        let mut rot = Complex::new(T::one(), T::zero());
        let mut acc = if order == 0 { self.half[0].re } else { T::zero() };
        for k in 1..=nyq {
            rot = rot * step;
            let kk = T::from_usize_lossy(k);
            let c = self.half[k];
            // Re[c e^{ikθ}] and its θ-derivative.
            let term = match order {
                0 => c.re * rot.re - c.im * rot.im,
                _ => -kk * (c.re * rot.im + c.im * rot.re),
            };
            if n.is_multiple_of(2) && k == nyq {
                // Nyquist mode as real cosine ĉ cos(nθ/2).
                let ang = kk * theta;
                acc += match order {
                    0 => c.re * ang.cos(),
                    _ => -kk * c.re * ang.sin(),
                };
            } else {
                acc += two * term;
            }
        }
        acc
    }

    /// Adjoint of evaluation: returns `g_i = Σ_j w_j C_i(θ_j)` where `C_i` is
    /// the cardinal interpolant of grid node `i`.
    pub fn eval_transpose(n: usize, thetas: &[T], weights: &[T]) -> Vec<T> {
        assert_eq!(thetas.len(), weights.len());
        let nyq = n / 2;
        let mut sums = vec![Complex::new(T::zero(), T::zero()); nyq + 1];
        for (&th, &w) in thetas.iter().zip(weights) {
            let step = Complex::new(th.cos(), th.sin());
            let mut rot = Complex::new(T::one(), T::zero());
            sums[0].re += w;
            for s in sums.iter_mut().skip(1) {
                rot = rot * step;
                *s = *s + rot.scale(w);
            }
        }
        let two = T::lit(2.0);
        let inv_n = T::one() / T::from_usize_lossy(n);
        (0..n)
            .map(|i| {
                let ti = T::two_pi() * T::from_usize_lossy(i) * inv_n;
                let mut acc = sums[0].re;
                for (k, s) in sums.iter().enumerate().skip(1) {
                    let ang = T::from_usize_lossy(k) * ti;
                    // Re[S_k e^{-ikθ_i}]
                    let re = s.re * ang.cos() + s.im * ang.sin();
                    if n.is_multiple_of(2) && k == nyq {
                        acc += re;
                    } else {
                        acc += two * re;
                    }
                }
                acc * inv_n
            })
            .collect()
    }
}

/// Uniform grid angles `2πj/n`.
pub fn grid<T: Real>(n: usize) -> Vec<T> {
    let h = T::two_pi() / T::from_usize_lossy(n);
    (0..n).map(|j| h * T::from_usize_lossy(j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_single_mode() {
        let n = 32;
        let th: Vec<f64> = grid(n);
        let v: Vec<f64> = th.iter().map(|t| (3.0 * t).sin()).collect();
        let d1 = derivative(&v, 1);
        let d2 = derivative(&v, 2);
        for (j, t) in th.iter().enumerate() {
            assert!((d1[j] - 3.0 * (3.0 * t).cos()).abs() < 1e-12);
            assert!((d2[j] + 9.0 * (3.0 * t).sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn interpolant_reproduces_grid_and_band_limited_off_grid() {
        let n = 16;
        let th: Vec<f64> = grid(n);
        let f = |t: f64| 1.0 + 0.3 * (2.0 * t).cos() - 0.2 * (5.0 * t).sin();
        let v: Vec<f64> = th.iter().map(|&t| f(t)).collect();
        let ip = TrigInterpolant::new(&v);
        for (j, &t) in th.iter().enumerate() {
            assert_eq!(ip.eval(t), v[j]);
        }
        for t in [0.1, 1.3, 2.0 * PI - 0.01] {
            assert!((ip.eval(t) - f(t)).abs() < 1e-13);
            let df = -0.6 * (2.0 * t).sin() - 1.0 * (5.0 * t).cos();
            assert!((ip.eval_derivative(t) - df).abs() < 1e-12);
        }
    }

    #[test]
    fn transpose_matches_cardinal_functions() {
        let n = 8;
        let pts = [0.3_f64, 1.7, 4.0];
        let w = [1.0, -2.0, 0.5];
        let g = TrigInterpolant::<f64>::eval_transpose(n, &pts, &w);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let ip = TrigInterpolant::new(&e);
            let expect: f64 = pts.iter().zip(&w).map(|(&t, &wj)| wj * ip.eval(t)).sum();
            assert!((g[i] - expect).abs() < 1e-13, "{i}: {} vs {expect}", g[i]);
        }
    }
}

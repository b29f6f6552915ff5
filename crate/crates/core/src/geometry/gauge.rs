use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::small::Vec2;
use crate::spectral::{self, TrigInterpolant};
use crate::Real;

/// Positive periodic samples `u(θ_i)`, `θ_i = 2πi/n`, with band-limited
/// interpolation between grid angles.
#[derive(Clone, Debug)]
pub struct GaugeFunction<T> {
    samples: Vec<T>,
    interp: TrigInterpolant<T>,
}

impl<T: Real> GaugeFunction<T> {
    pub fn new(samples: Vec<T>) -> Result<Self> {
        let n = samples.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGauge(format!("grid size {n} must be a power of two >= 8")));
        }
        if let Some((i, v)) = samples.iter().enumerate().find(|(_, v)| !(**v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidGauge(format!("sample {i} is {v}, must be positive and finite")));
        }
        let interp = TrigInterpolant::new(&samples);
        Ok(Self { samples, interp })
    }

    pub fn from_fn(n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(spectral::grid(n).into_iter().map(f).collect())
    }

    /// Disk of radius `1/value`.
    pub fn constant(n: usize, value: T) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// Gauge of the convex polygon `{x : n_k · x ≤ d_k}` given as
    /// `(normal angle, support distance)` pairs; the origin must be interior.
    pub fn polygon(n: usize, faces: &[(T, T)]) -> Result<Self> {
        if faces.len() < 3 || faces.iter().any(|&(_, d)| !(d > T::zero())) {
            return Err(Error::invalid("polygon needs >= 3 faces with positive support distances"));
        }
        Self::from_fn(n, |t| {
            faces
                .iter()
                .map(|&(psi, d)| (t - psi).cos() / d)
                .fold(T::neg_infinity(), T::max)
        })
    }

    /// Square `[-h, h]²` (axis-aligned, corners at `π/4 + kπ/2`).
    pub fn square(n: usize, half_width: T) -> Result<Self> {
        let q = T::FRAC_PI_2();
        let faces: Vec<(T, T)> = (0..4).map(|k| (q * T::from_usize_lossy(k), half_width)).collect();
        Self::polygon(n, &faces)
    }

    /// Regular polygon with circumradius `radius` and a vertex at angle `phase`.
    pub fn regular_polygon(n: usize, sides: usize, radius: T, phase: T) -> Result<Self> {
        if sides < 3 {
            return Err(Error::invalid("regular polygon needs >= 3 sides"));
        }
        let step = T::two_pi() / T::from_usize_lossy(sides);
        let half = step / T::lit(2.0);
        let d = radius * half.cos();
        let faces: Vec<(T, T)> = (0..sides).map(|k| (phase + half + step * T::from_usize_lossy(k), d)).collect();
        Self::polygon(n, &faces)
    }

    /// Unit disk with an inward V-shaped notch at `θ = 0`: `u = 1 + depth·(1 − |θ|/width)⁺`.
    /// Star-shaped and Lipschitz but not convex.
    pub fn reentrant_corner(n: usize, depth: T, width: T) -> Result<Self> {
        if !(depth > T::zero()) || !(width > T::zero() && width < T::PI()) {
            return Err(Error::invalid("notch needs depth > 0 and width in (0, π)"));
        }
        Self::from_fn(n, |t| {
            let t = if t > T::PI() { t - T::two_pi() } else { t };
            T::one() + depth * (T::one() - t.abs() / width).max(T::zero())
        })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Grid spacing `2π/n`.
    pub fn h(&self) -> T {
        T::two_pi() / T::from_usize_lossy(self.n())
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn angles(&self) -> Vec<T> {
        spectral::grid(self.n())
    }

    pub fn sup_norm(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.samples.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    /// Interpolated value at any angle.
    pub fn eval(&self, theta: T) -> T {
        self.interp.eval(theta)
    }

    pub fn eval_derivative(&self, theta: T) -> T {
        self.interp.eval_derivative(theta)
    }

    pub fn interpolant(&self) -> &TrigInterpolant<T> {
        &self.interp
    }

    /// Spectral derivative of the given order on the grid.
    pub fn derivative(&self, order: u32) -> Vec<T> {
        spectral::derivative(&self.samples, order)
    }

    /// `u + t v`, checked for positivity.
    pub fn perturbed(&self, v: &[T], t: T) -> Result<Self> {
        if v.len() != self.n() {
            return Err(Error::invalid(format!("direction has {} samples, gauge has {}", v.len(), self.n())));
        }
        Self::new(self.samples.iter().zip(v).map(|(&a, &b)| a + t * b).collect())
    }

    /// Samples shifted by `steps` grid cells (rotation of the domain by `steps·h`).
    pub fn rotated(&self, steps: usize) -> Self {
        let n = self.n();
        let s = steps % n;
        let mut out = vec![T::zero(); n];
        for (i, v) in self.samples.iter().enumerate() {
            out[(i + s) % n] = *v;
        }
        Self::new(out).expect("rotation preserves validity")
    }

    /// Writes the `# gauge v1 n=<n>` CSV format (`theta,u` rows).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "# gauge v1 n={}", self.n()).unwrap();
        for (t, u) in self.angles().into_iter().zip(&self.samples) {
            writeln!(s, "{},{}", t.to_f64_lossy(), u.to_f64_lossy()).unwrap();
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty gauge file".into()))??;
        let n: usize = header
            .trim()
            .strip_prefix("# gauge v1 n=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad gauge header `{header}`")))?;
        let mut samples = Vec::with_capacity(n);
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line == "theta,u" {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(_theta), Some(u), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("expected two columns, got `{line}`")));
            };
            let u: f64 = u.trim().parse().map_err(|e| Error::Parse(format!("`{u}`: {e}")))?;
            samples.push(T::lit(u));
        }
        if samples.len() != n {
            return Err(Error::Parse(format!("header says n={n}, found {} rows", samples.len())));
        }
        Self::new(samples)
    }
}

/// Curvature `κ = (u'' + u) / (1 + (u'/u)²)^{3/2}` of `∂Ω_u` at the grid angles.
pub fn curvature<T: Real>(u: &GaugeFunction<T>) -> Result<Vec<T>> {
    if u.min() <= T::zero() {
        return Err(Error::InvalidGauge("non-positive sample".into()));
    }
    let d1 = u.derivative(1);
    let d2 = u.derivative(2);
    Ok(u.samples()
        .iter()
        .zip(d1.iter().zip(&d2))
        .map(|(&v, (&dv, &ddv))| {
            let q = dv / v;
            (ddv + v) / (T::one() + q * q).powf(T::lit(1.5))
        })
        .collect())
}

/// First and second boundary displacements generated by `u → u + t v`.
#[derive(Clone, Debug)]
pub struct BoundaryJet<T> {
    /// `ξ¹ = −(v/u²) e_r`
    pub first: Vec<Vec2<T>>,
    /// `ξ² = (2v²/u³) e_r`
    pub second: Vec<Vec2<T>>,
}

pub fn boundary_jet<T: Real>(u: &GaugeFunction<T>, v: &[T]) -> Result<BoundaryJet<T>> {
    if v.len() != u.n() {
        return Err(Error::invalid("direction and gauge grids differ"));
    }
    let mut first = Vec::with_capacity(u.n());
    let mut second = Vec::with_capacity(u.n());
    for ((th, &uu), &vv) in u.angles().into_iter().zip(u.samples()).zip(v) {
        let er = Vec2::polar_unit(th);
        first.push(er.scale(-vv / (uu * uu)));
        second.push(er.scale(T::lit(2.0) * vv * vv / (uu * uu * uu)));
    }
    Ok(BoundaryJet { first, second })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reentrant_notch_is_not_convex() {
        let u = GaugeFunction::<f64>::reentrant_corner(64, 0.3, 0.5).unwrap();
        assert!((u.samples()[0] - 1.3).abs() < 1e-15);
        assert_eq!(u.samples()[32], 1.0);
        assert!(crate::geometry::convexity_residual(&u).min_weak() < 0.0);
        assert!(GaugeFunction::<f64>::reentrant_corner(64, 0.3, 4.0).is_err());
    }

    #[test]
    fn rejects_bad_grids_and_values() {
        assert!(GaugeFunction::<f64>::constant(6, 1.0).is_err());
        assert!(GaugeFunction::<f64>::constant(12, 1.0).is_err());
        let mut s = vec![1.0; 16];
        s[3] = 0.0;
        assert!(GaugeFunction::new(s).is_err());
    }

    #[test]
    fn curvature_of_disks() {
        for (val, k) in [(1.0, 1.0), (0.5, 0.5)] {
            let u = GaugeFunction::<f64>::constant(32, val).unwrap();
            for kap in curvature(&u).unwrap() {
                assert!((kap - k).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn curvature_of_single_cosine_mode() {
        let u = GaugeFunction::from_fn(64, |t: f64| 1.0 - 0.3 * (2.0 * t).cos()).unwrap();
        let k = curvature(&u).unwrap();
        assert!((k[0] - 1.9).abs() < 1e-12);
    }

    #[test]
    fn curvature_is_rotation_equivariant() {
        let u = GaugeFunction::from_fn(32, |t: f64| 1.0 + 0.2 * (3.0 * t).sin() + 0.1 * t.cos()).unwrap();
        let k0 = curvature(&u).unwrap();
        let k1 = curvature(&u.rotated(1)).unwrap();
        for i in 0..32 {
            assert!((k1[(i + 1) % 32] - k0[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_jet_examples() {
        let u = GaugeFunction::constant(16, 1.0).unwrap();
        let j = boundary_jet(&u, &[1.0; 16]).unwrap();
        for (i, th) in u.angles().into_iter().enumerate() {
            assert!((j.first[i] - Vec2::polar_unit(th).scale(-1.0)).max_abs() < 1e-15);
            assert!((j.second[i] - Vec2::polar_unit(th).scale(2.0)).max_abs() < 1e-15);
        }
        let u2 = GaugeFunction::<f64>::constant(16, 2.0).unwrap();
        let v: Vec<f64> = u2.angles().iter().map(|t| t.cos()).collect();
        let j = boundary_jet(&u2, &v).unwrap();
        assert!((j.first[0] - Vec2::new(-0.25, 0.0)).max_abs() < 1e-15);
        assert!((j.second[0] - Vec2::new(0.25, 0.0)).max_abs() < 1e-15);
        let z = boundary_jet(&u2, &[0.0; 16]).unwrap();
        assert!(z.first.iter().chain(&z.second).all(|p| p.max_abs() == 0.0));
    }

    #[test]
    fn csv_roundtrip() {
        let u = GaugeFunction::from_fn(16, |t: f64| 1.0 + 0.1 * t.cos()).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"# gauge v1 n=16\n"));
        let back = GaugeFunction::<f64>::read_csv(&buf[..]).unwrap();
        assert_eq!(back.samples(), u.samples());
    }
}

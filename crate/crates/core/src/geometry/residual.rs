use crate::geometry::GaugeFunction;
use crate::Real;

/// Feasibility slack for cone and bound checks: `1e-8 · max(1, ‖u‖_∞)`.
pub fn cone_tolerance<T: Real>(u: &GaugeFunction<T>) -> T {
    T::lit(1e-8) * T::one().max(u.sup_norm())
}

/// `(u_{i+1} − 2u_i + u_{i−1}) / h²` on the periodic grid.
pub fn second_difference<T: Real>(u: &[T]) -> Vec<T> {
    let n = u.len();
    let h = T::two_pi() / T::from_usize_lossy(n);
    let inv_h2 = T::one() / (h * h);
    (0..n)
        .map(|i| (u[(i + 1) % n] - T::lit(2.0) * u[i] + u[(i + n - 1) % n]) * inv_h2)
        .collect()
}

/// Nodal approximations of the measure `u'' + u`.
#[derive(Clone, Debug)]
pub struct ConvexityResidual<T> {
    /// Spectral `u'' + u` (diagnostic).
    pub spectral: Vec<T>,
    /// Second-central-difference `D²u + u`; the constraint the optimizer enforces.
    pub weak: Vec<T>,
    /// `weak_i · 2π/n`.
    pub masses: Vec<T>,
    pub total_mass: T,
    pub tol: T,
    pub convex: bool,
}

impl<T: Real> ConvexityResidual<T> {
    pub fn n(&self) -> usize {
        self.weak.len()
    }

    pub fn min_weak(&self) -> T {
        self.weak.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn h(&self) -> T {
        T::two_pi() / T::from_usize_lossy(self.n())
    }
}

pub fn convexity_residual<T: Real>(u: &GaugeFunction<T>) -> ConvexityResidual<T> {
    let s = u.samples();
    let d2 = u.derivative(2);
    let spectral: Vec<T> = d2.iter().zip(s).map(|(&a, &b)| a + b).collect();
    let weak: Vec<T> = second_difference(s).into_iter().zip(s).map(|(a, &b)| a + b).collect();
    let h = u.h();
    let masses: Vec<T> = weak.iter().map(|&m| m * h).collect();
    let total_mass = masses.iter().copied().sum();
    let tol = cone_tolerance(u);
    let convex = weak.iter().all(|&m| m >= -tol);
    ConvexityResidual { spectral, weak, masses, total_mass, tol, convex }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn disk_is_convex_with_unit_density() {
        let r = convexity_residual(&GaugeFunction::<f64>::constant(32, 1.0).unwrap());
        assert!(r.convex);
        assert!(r.weak.iter().chain(&r.spectral).all(|m| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn elongated_cosine_is_not_convex() {
        let u = GaugeFunction::from_fn(64, |t: f64| 1.0 + 0.5 * (2.0 * t).cos()).unwrap();
        let r = convexity_residual(&u);
        assert!(!r.convex);
        let min_spec = r.spectral.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min_spec + 0.5).abs() < 1e-12);
        for (i, t) in u.angles().into_iter().enumerate() {
            assert!((r.spectral[i] - (1.0 - 1.5 * (2.0 * t).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_and_spectral_agree_at_second_order() {
        // max |weak − spectral| = O(n^{-2}) for smooth u; the ratio between
        // successive doublings approaches 4.
        let f = |t: f64| 1.0 + 0.3 * (3.0 * t).cos();
        let err = |n: usize| {
            let r = convexity_residual(&GaugeFunction::from_fn(n, f).unwrap());
            r.weak.iter().zip(&r.spectral).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 / e2 > 3.8 && e1 / e2 < 4.2, "{e1} {e2}");
    }

    #[test]
    fn total_mass_is_trapezoid_integral_of_u() {
        let u = GaugeFunction::from_fn(128, |t: f64| 1.2 + 0.3 * t.sin() + 0.05 * (7.0 * t).cos()).unwrap();
        let r = convexity_residual(&u);
        let quad: f64 = u.samples().iter().sum::<f64>() * u.h();
        assert!((r.total_mass - quad).abs() < 1e-12 * quad);
        assert!((quad - 2.4 * PI).abs() < 1e-12);
    }

    #[test]
    fn square_mass_sits_on_corners() {
        let u = GaugeFunction::square(256, 1.0).unwrap();
        let r = convexity_residual(&u);
        assert!(r.convex);
        assert!((r.total_mass - 4.0 * SQRT_2).abs() < 1e-3);
        let corner_mass: f64 = [32, 96, 160, 224].iter().map(|&i| r.masses[i]).sum();
        assert!(corner_mass / r.total_mass > 0.99);
    }
}

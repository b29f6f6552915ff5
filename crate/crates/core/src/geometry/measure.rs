//! Area `m(u) = ∫ 1/(2u²) dθ` and perimeter `p(u) = ∫ √(u² + u'²)/u² dθ` with
//! their first and second Gateaux derivatives.
//!
//! The area uses the nodal trapezoid rule. The perimeter integrand is
//! evaluated at cell midpoints from the cell average and first difference of
//! `u`, which is exact cell by cell for polygons whose vertices sit on grid
//! nodes and involves the same stencil as the discrete convexity cone.

use crate::error::{Error, Result};
use crate::geometry::GaugeFunction;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Zero,
    One,
    Two,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AreaPerimeter<T> {
    pub m: T,
    pub p: T,
    pub dm: Option<T>,
    pub dp: Option<T>,
    pub d2m: Option<T>,
    pub d2p: Option<T>,
}

/// Partial derivatives of `g(u, q) = √(u² + q²)/u²`.
struct PerimeterIntegrand<T> {
    g: T,
    gu: T,
    gq: T,
    guu: T,
    guq: T,
    gqq: T,
}

impl<T: Real> PerimeterIntegrand<T> {
    fn at(u: T, q: T) -> Self {
        let two = T::lit(2.0);
        let s = (u * u + q * q).sqrt();
        let (u2, u3, s3) = (u * u, u * u * u, s * s * s);
        Self {
            g: s / u2,
            gu: T::one() / (u * s) - two * s / u3,
            gq: q / (s * u2),
            guu: -(s * s + u2) / (u2 * s3) - two / (u2 * s) + T::lit(6.0) * s / (u2 * u2),
            guq: -q / (u * s3) - two * q / (s * u3),
            gqq: T::one() / s3,
        }
    }
}

fn midpoint_stencil<T: Real>(w: &[T], i: usize) -> (T, T) {
    let n = w.len();
    let h = T::two_pi() / T::from_usize_lossy(n);
    let (a, b) = (w[i], w[(i + 1) % n]);
    ((a + b) / T::lit(2.0), (b - a) / h)
}

pub fn area_perimeter<T: Real>(u: &GaugeFunction<T>, v: Option<&[T]>, order: Order) -> Result<AreaPerimeter<T>> {
    let n = u.n();
    let h = u.h();
    let s = u.samples();
    let v = match (order, v) {
        (Order::Zero, _) => None,
        (_, Some(v)) if v.len() == n => Some(v),
        (_, Some(_)) => return Err(Error::invalid("direction and gauge grids differ")),
        (_, None) => return Err(Error::invalid("a direction is required for derivatives")),
    };

    let mut out = AreaPerimeter::default();
    let half = T::lit(0.5);
    let (mut m, mut dm, mut d2m) = (T::zero(), T::zero(), T::zero());
    for i in 0..n {
        let ui = s[i];
        m += half / (ui * ui);
        if let Some(v) = v {
            let u3 = ui * ui * ui;
            dm -= v[i] / u3;
            d2m += T::lit(3.0) * v[i] * v[i] / (u3 * ui);
        }
    }
    let (mut p, mut dp, mut d2p) = (T::zero(), T::zero(), T::zero());
    for i in 0..n {
        let (um, q) = midpoint_stencil(s, i);
        let g = PerimeterIntegrand::at(um, q);
        p += g.g;
        if let Some(v) = v {
            let (vm, dv) = midpoint_stencil(v, i);
            dp += g.gu * vm + g.gq * dv;
            d2p += g.guu * vm * vm + T::lit(2.0) * g.guq * vm * dv + g.gqq * dv * dv;
        }
    }
    out.m = m * h;
    out.p = p * h;
    if v.is_some() {
        out.dm = Some(dm * h);
        out.dp = Some(dp * h);
        if order == Order::Two {
            out.d2m = Some(d2m * h);
            out.d2p = Some(d2p * h);
        }
    }
    Ok(out)
}

/// `∂m/∂u_i = −h / u_i³`.
pub fn area_gradient<T: Real>(u: &GaugeFunction<T>) -> Vec<T> {
    let h = u.h();
    u.samples().iter().map(|&x| -h / (x * x * x)).collect()
}

/// `∂p/∂u_i` of the discrete perimeter.
pub fn perimeter_gradient<T: Real>(u: &GaugeFunction<T>) -> Vec<T> {
    let n = u.n();
    let h = u.h();
    let s = u.samples();
    let half = T::lit(0.5);
    let mut grad = vec![T::zero(); n];
    for i in 0..n {
        let (um, q) = midpoint_stencil(s, i);
        let g = PerimeterIntegrand::at(um, q);
        // cell i couples nodes i and i+1: ū = (u_i + u_{i+1})/2, q = (u_{i+1} − u_i)/h
        grad[i] += h * (g.gu * half - g.gq / h);
        grad[(i + 1) % n] += h * (g.gu * half + g.gq / h);
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_disk_values() {
        let u = GaugeFunction::constant(64, 1.0).unwrap();
        let r = area_perimeter(&u, Some(&[1.0; 64]), Order::Two).unwrap();
        assert!((r.m - PI).abs() < 1e-13);
        assert!((r.p - 2.0 * PI).abs() < 1e-13);
        assert!((r.dm.unwrap() + 2.0 * PI).abs() < 1e-13);
        assert!((r.d2m.unwrap() - 6.0 * PI).abs() < 1e-12);
        // p(1/ρ) = 2πρ ⇒ p' = −2π, p'' = 4π along v ≡ 1
        assert!((r.dp.unwrap() + 2.0 * PI).abs() < 1e-12);
        assert!((r.d2p.unwrap() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn square_area_and_perimeter() {
        let u = GaugeFunction::<f64>::square(1024, 1.0).unwrap();
        let r = area_perimeter(&u, None, Order::Zero).unwrap();
        assert!((r.m - 4.0).abs() < 1e-4, "{}", r.m);
        assert!((r.p - 8.0).abs() < 1e-4, "{}", r.p);
    }

    #[test]
    fn gradients_match_directional_derivatives() {
        let u = GaugeFunction::from_fn(32, |t: f64| 1.0 + 0.2 * (2.0 * t).cos() + 0.1 * t.sin()).unwrap();
        let v: Vec<f64> = u.angles().iter().map(|t| (3.0 * t).cos() + 0.3).collect();
        let r = area_perimeter(&u, Some(&v), Order::One).unwrap();
        let gp = perimeter_gradient(&u);
        let gm = area_gradient(&u);
        let dp: f64 = gp.iter().zip(&v).map(|(a, b)| a * b).sum();
        let dm: f64 = gm.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((dp - r.dp.unwrap()).abs() < 1e-12);
        assert!((dm - r.dm.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn missing_direction_is_rejected() {
        let u = GaugeFunction::constant(16, 1.0).unwrap();
        assert!(area_perimeter(&u, None, Order::One).is_err());
    }
}

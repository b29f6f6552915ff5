//! Detection of Dirac-mass structure in the measure `u'' + u`.

use crate::error::{Error, Result};
use crate::geometry::ConvexityResidual;
use crate::Real;

#[derive(Clone, Copy, Debug)]
pub struct PolygonOptions<T> {
    /// Angular width of one capture window.
    pub window: T,
    /// Stop once this fraction of the mass is captured.
    pub frac: T,
    /// An arc is straight when its pointwise density stays below
    /// `flatness · total_mass / 2π`.
    pub flatness: T,
    /// Largest fraction of `𝕋` the windows may cover for the measure to be
    /// reported as polygonal.
    pub max_coverage: T,
}

impl<T: Real> Default for PolygonOptions<T> {
    fn default() -> Self {
        Self {
            window: T::two_pi() / T::lit(64.0),
            frac: T::lit(0.9),
            flatness: T::lit(0.05),
            max_coverage: T::lit(0.25),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Vertex<T> {
    /// Mass centroid of the window, in `[0, 2π)`.
    pub angle: T,
    pub mass: T,
    /// Window as a half-open node range `start..start+width` (mod n).
    pub start: usize,
    pub width: usize,
}

#[derive(Clone, Debug)]
pub struct ArcSegment<T> {
    pub start_angle: T,
    pub end_angle: T,
    pub max_density: T,
    pub straight: bool,
}

#[derive(Clone, Debug)]
pub struct PolygonReport<T> {
    /// Sorted by angle.
    pub vertices: Vec<Vertex<T>>,
    pub segments: Vec<ArcSegment<T>>,
    pub total_mass: T,
    pub captured_fraction: T,
    /// Mass fraction outside every window.
    pub outside_fraction: T,
    /// Fraction of `𝕋` covered by the windows.
    pub coverage: T,
    pub polygonal: bool,
}

impl<T: Real> PolygonReport<T> {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
}

/// Greedy window capture of the positive part of the nodal masses.
pub fn detect_polygon<T: Real>(mu: &ConvexityResidual<T>, opts: &PolygonOptions<T>) -> Result<PolygonReport<T>> {
    let n = mu.n();
    let h = mu.h();
    if !(mu.total_mass > T::zero()) {
        return Err(Error::DegenerateMeasure(format!("total mass {} is not positive", mu.total_mass)));
    }
    if !(opts.window > T::zero()) || !(opts.frac > T::zero() && opts.frac <= T::one()) {
        return Err(Error::invalid("window must be positive and frac in (0, 1]"));
    }
    let width = ((opts.window / h).round().to_usize().unwrap_or(1)).clamp(1, n);
    let pos: Vec<T> = mu.masses.iter().map(|&m| m.max(T::zero())).collect();
    let total: T = pos.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::DegenerateMeasure("no positive mass".into()));
    }

    let mut taken = vec![false; n];
    let mut vertices = Vec::new();
    let mut captured = T::zero();
    while captured < opts.frac * total {
        let mut best: Option<(usize, T)> = None;
        for start in 0..n {
            if (0..width).any(|k| taken[(start + k) % n]) {
                continue;
            }
            let m: T = (0..width).map(|k| pos[(start + k) % n]).sum();
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((start, m));
            }
        }
        let Some((start, m)) = best else { break };
        let mut moment = T::zero();
        for k in 0..width {
            let i = (start + k) % n;
            taken[i] = true;
            moment += pos[i] * T::from_usize_lossy(k);
        }
        let offset = if m > T::zero() { moment / m } else { T::from_usize_lossy(width - 1) / T::lit(2.0) };
        let angle = (T::from_usize_lossy(start) + offset) * h;
        let angle = angle - T::two_pi() * (angle / T::two_pi()).floor();
        vertices.push(Vertex { angle, mass: m, start, width });
        captured += m;
        if vertices.len() * width >= n {
            break;
        }
    }
    vertices.sort_by(|a, b| a.angle.partial_cmp(&b.angle).unwrap());

    let density_cut = opts.flatness * mu.total_mass / T::two_pi();
    let mut segments = Vec::new();
    if !vertices.is_empty() {
        for (k, v) in vertices.iter().enumerate() {
            let next = &vertices[(k + 1) % vertices.len()];
            let from = (v.start + v.width) % n;
            let to = next.start;
            let len = (to + n - from) % n;
            if len == 0 {
                continue;
            }
            let max_density = (0..len).map(|j| mu.weak[(from + j) % n]).fold(T::neg_infinity(), T::max);
            segments.push(ArcSegment {
                start_angle: T::from_usize_lossy(from) * h,
                end_angle: T::from_usize_lossy(to) * h,
                max_density,
                straight: max_density <= density_cut,
            });
        }
    }
    let coverage = T::from_usize_lossy(vertices.len() * width) / T::from_usize_lossy(n);
    let captured_fraction = captured / total;
    Ok(PolygonReport {
        vertices,
        segments,
        total_mass: mu.total_mass,
        captured_fraction,
        outside_fraction: T::one() - captured_fraction,
        coverage,
        polygonal: captured_fraction >= opts.frac && coverage <= opts.max_coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{convexity_residual, GaugeFunction};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn circ_dist(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    }

    #[test]
    fn square_has_four_equal_vertices() {
        let u = GaugeFunction::square(1024, 1.0).unwrap();
        let opts = PolygonOptions { window: 2.0 * PI / 32.0, ..Default::default() };
        let rep = detect_polygon(&convexity_residual(&u), &opts).unwrap();
        assert!(rep.polygonal);
        assert_eq!(rep.vertex_count(), 4);
        let h = 2.0 * PI / 1024.0;
        for (k, v) in rep.vertices.iter().enumerate() {
            assert!(circ_dist(v.angle, FRAC_PI_4 + k as f64 * FRAC_PI_2) < h, "{}", v.angle);
            assert!((v.mass - SQRT_2).abs() < 0.01 * SQRT_2, "{}", v.mass);
        }
        assert!(rep.segments.iter().all(|s| s.straight));
    }

    #[test]
    fn disk_has_no_polygon_structure() {
        let u = GaugeFunction::constant(256, 1.0).unwrap();
        let rep = detect_polygon(&convexity_residual(&u), &PolygonOptions::default()).unwrap();
        assert!(!rep.polygonal);
        // 64 windows cover 𝕋; a uniform measure needs ≈ 0.9 of them
        assert!((rep.vertex_count() as f64 - 0.9 * 64.0).abs() <= 1.0, "{}", rep.vertex_count());
    }

    #[test]
    fn hexagon_vertices_at_corners() {
        let u = GaugeFunction::regular_polygon(512, 6, 1.0, 0.0).unwrap();
        let rep = detect_polygon(&convexity_residual(&u), &PolygonOptions::default()).unwrap();
        assert_eq!(rep.vertex_count(), 6);
        let h = 2.0 * PI / 512.0;
        let m0 = rep.vertices[0].mass;
        for (k, v) in rep.vertices.iter().enumerate() {
            assert!(circ_dist(v.angle, k as f64 * PI / 3.0) < h, "{} vs {}", v.angle, k as f64 * PI / 3.0);
            assert!((v.mass - m0).abs() < 0.02 * m0);
        }
    }

    #[test]
    fn non_positive_mass_fails_loudly() {
        let mut r = convexity_residual(&GaugeFunction::constant(16, 1.0).unwrap());
        r.total_mass = 0.0;
        assert!(detect_polygon(&r, &PolygonOptions::default()).is_err());
    }
}

//! Displacement fields built from a boundary direction `v` on the gauge grid.
//!
//! On the reference disk the path `u → u + tv` moves the point at polar
//! coordinates `(r̂, θ)` by `(1/(u+tv) − 1/u)(θ) η(r̂) e_θ`, where `e_θ` is the
//! radial unit vector. Its `t`-jets are `ξ¹ = −(v/u²) η e_θ` and
//! `ξ² = (2v²/u³) η e_θ`. Displacements are used through their nodal values,
//! so that a moved mesh is exactly the mesh of the transported problem.

use crate::error::{Error, Result};
use crate::fem::{DiskMesh, MappedMesh};
use crate::geometry::GaugeFunction;
use crate::small::Vec2;
use crate::spectral::TrigInterpolant;
use crate::Real;

/// Radial profile `η(r̂)` of the interior extension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile<T> {
    /// `0` for `r̂ ≤ r0`, `1` for `r̂ ≥ r1`, quintic smoothstep in between.
    Cutoff { r0: T, r1: T },
    /// `η = r̂`: the moved mesh is the gauge-map mesh of `u + tv`.
    Radial,
}

impl<T: Real> Default for Profile<T> {
    fn default() -> Self {
        Profile::Cutoff { r0: T::lit(0.25), r1: T::lit(0.5) }
    }
}

impl<T: Real> Profile<T> {
    pub fn validate(&self) -> Result<()> {
        if let Profile::Cutoff { r0, r1 } = *self {
            if !(r0 >= T::zero() && r0 < r1 && r1 <= T::one()) {
                return Err(Error::invalid(format!("cutoff radii must satisfy 0 ≤ r0 < r1 ≤ 1, got {r0}, {r1}")));
            }
        }
        Ok(())
    }

    pub fn eta(&self, r: T) -> T {
        match *self {
            Profile::Radial => r,
            Profile::Cutoff { r0, r1 } => {
                if r <= r0 {
                    T::zero()
                } else if r >= r1 {
                    T::one()
                } else {
                    let s = (r - r0) / (r1 - r0);
                    s * s * s * (T::lit(10.0) + s * (T::lit(-15.0) + T::lit(6.0) * s))
                }
            }
        }
    }
}

/// Boundary direction `v` on `Ω_u` with an interior extension profile.
#[derive(Clone, Debug)]
pub struct DeformationField<T> {
    u: TrigInterpolant<T>,
    v: TrigInterpolant<T>,
    profile: Profile<T>,
}

impl<T: Real> DeformationField<T> {
    pub fn new(u: &GaugeFunction<T>, v: &[T], profile: Profile<T>) -> Result<Self> {
        profile.validate()?;
        if v.len() != u.n() {
            return Err(Error::invalid(format!("direction has {} samples, gauge has {}", v.len(), u.n())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("direction has non-finite samples"));
        }
        Ok(Self { u: u.interpolant().clone(), v: TrigInterpolant::new(v), profile })
    }

    pub fn profile(&self) -> Profile<T> {
        self.profile
    }

    fn nodal(&self, mesh: &DiskMesh<T>, radial: impl Fn(T, T) -> T) -> Vec<Vec2<T>> {
        mesh.radius()
            .iter()
            .zip(mesh.angle())
            .map(|(&r, &th)| {
                let eta = self.profile.eta(r);
                if eta == T::zero() {
                    return Vec2::zero();
                }
                let s = radial(self.u.eval(th), self.v.eval(th));
                Vec2::polar_unit(th).scale(s * eta)
            })
            .collect()
    }

    /// Nodal `ξ¹`.
    pub fn first(&self, mesh: &DiskMesh<T>) -> Vec<Vec2<T>> {
        self.nodal(mesh, |u, v| -v / (u * u))
    }

    /// Nodal `ξ²`.
    pub fn second(&self, mesh: &DiskMesh<T>) -> Vec<Vec2<T>> {
        self.nodal(mesh, |u, v| T::lit(2.0) * v * v / (u * u * u))
    }

    /// Nodal displacement of the path at parameter `t`.
    pub fn path(&self, mesh: &DiskMesh<T>, t: T) -> Vec<Vec2<T>> {
        self.nodal(mesh, |u, v| T::one() / (u + t * v) - T::one() / u)
    }
}

/// `‖ξ‖_{W^{1,∞}}` of a nodal P1 displacement: `max|ξ| + max|∇ξ|` with the
/// entrywise max norm.
pub fn w1inf_norm<T: Real>(mesh: &MappedMesh<T>, xi: &[Vec2<T>]) -> T {
    let sup = xi.iter().map(|p| p.max_abs()).fold(T::zero(), T::max);
    let grad = mesh
        .triangles()
        .iter()
        .zip(mesh.elements())
        .map(|(t, el)| {
            let mut g = crate::small::Mat2::zero();
            for i in 0..3 {
                g += xi[t[i]].outer(el.grads[i]);
            }
            g.max_abs()
        })
        .fold(T::zero(), T::max);
    sup + grad
}

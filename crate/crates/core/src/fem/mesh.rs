//! Reference triangulation of the unit disk and its image under the gauge map
//! `Φ_u(x) = x / u(x/|x|)`.
//!
//! Level `ℓ` has `N = 2^ℓ` concentric rings; ring `i` carries `16 i` equally
//! spaced nodes, so the level-0 mesh is a fan of 16 triangles and each level
//! splits every triangle into four. Ring radii are graded towards the boundary
//! by `ρ(s) = s(1 + g(1 − s))`.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::GaugeFunction;
use crate::small::Vec2;
use crate::Real;

pub const MAX_LEVEL: usize = 9;
const SECTORS: usize = 16;
/// Radial grading strength `g`; boundary rings are `1 − g` times the uniform spacing.
pub const GRADING: f64 = 0.6;

#[derive(Debug)]
struct MeshData<T> {
    level: usize,
    nodes: Vec<Vec2<T>>,
    radius: Vec<T>,
    angle: Vec<T>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
    dof: Vec<usize>,
    n_dofs: usize,
}

/// Nested reference mesh of the closed unit disk. Cheap to clone.
#[derive(Clone, Debug)]
pub struct DiskMesh<T>(Arc<MeshData<T>>);

pub const NOT_A_DOF: usize = usize::MAX;

fn grade<T: Real>(s: T) -> T {
    s * (T::one() + T::lit(GRADING) * (T::one() - s))
}

/// Builds the reference mesh of the given level.
pub fn build_mesh<T: Real>(level: usize) -> Result<DiskMesh<T>> {
    if level > MAX_LEVEL {
        return Err(Error::invalid(format!("mesh level {level} exceeds {MAX_LEVEL}")));
    }
    let rings = 1usize << level;
    let ring_start = |i: usize| if i == 0 { 0 } else { 1 + SECTORS * i * (i - 1) / 2 };
    let n_nodes = ring_start(rings + 1);
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut radius = Vec::with_capacity(n_nodes);
    let mut angle = Vec::with_capacity(n_nodes);
    nodes.push(Vec2::zero());
    radius.push(T::zero());
    angle.push(T::zero());
    for i in 1..=rings {
        let r = grade(T::from_usize_lossy(i) / T::from_usize_lossy(rings));
        let m = SECTORS * i;
        for j in 0..m {
            let th = T::two_pi() * T::from_usize_lossy(j) / T::from_usize_lossy(m);
            nodes.push(Vec2::polar_unit(th).scale(r));
            radius.push(r);
            angle.push(th);
        }
    }
    // Node `j` of sector `s` on ring `i` (0 ≤ j ≤ i).
    let node = |i: usize, s: usize, j: usize| {
        if i == 0 {
            0
        } else {
            ring_start(i) + (s * i + j) % (SECTORS * i)
        }
    };
    let mut triangles = Vec::with_capacity(SECTORS * rings * rings);
    for i in 1..=rings {
        for s in 0..SECTORS {
            for j in 0..i {
                triangles.push([node(i - 1, s, j), node(i, s, j), node(i, s, j + 1)]);
                if j + 1 < i {
                    triangles.push([node(i - 1, s, j), node(i, s, j + 1), node(i - 1, s, j + 1)]);
                }
            }
        }
    }
    let boundary: Vec<usize> = (ring_start(rings)..n_nodes).collect();
    let mut dof = vec![NOT_A_DOF; n_nodes];
    let interior = ring_start(rings);
    for (k, d) in dof.iter_mut().enumerate().take(interior) {
        *d = k;
    }
    Ok(DiskMesh(Arc::new(MeshData { level, nodes, radius, angle, triangles, boundary, dof, n_dofs: interior })))
}

impl<T: Real> DiskMesh<T> {
    pub fn level(&self) -> usize {
        self.0.level
    }

    pub fn nodes(&self) -> &[Vec2<T>] {
        &self.0.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.0.nodes.len()
    }

    /// Reference polar radius of each node.
    pub fn radius(&self) -> &[T] {
        &self.0.radius
    }

    /// Reference polar angle of each node, in `[0, 2π)`.
    pub fn angle(&self) -> &[T] {
        &self.0.angle
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.0.triangles
    }

    /// Boundary nodes in increasing angle.
    pub fn boundary(&self) -> &[usize] {
        &self.0.boundary
    }

    /// Number of boundary nodes, `16 · 2^level`.
    pub fn boundary_len(&self) -> usize {
        self.0.boundary.len()
    }

    /// Unknown index of node `k`, or [`NOT_A_DOF`] on the boundary.
    pub fn dof(&self, k: usize) -> usize {
        self.0.dof[k]
    }

    pub fn n_dofs(&self) -> usize {
        self.0.n_dofs
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.0.dof[k] == NOT_A_DOF
    }

    /// Sum of reference triangle areas.
    pub fn area(&self) -> T {
        self.triangles()
            .iter()
            .map(|t| {
                let p = self.nodes();
                cross(p[t[1]] - p[t[0]], p[t[2]] - p[t[0]]) / T::lit(2.0)
            })
            .sum()
    }

    /// Largest reference element diameter.
    pub fn max_diameter(&self) -> T {
        let p = self.nodes();
        self.triangles()
            .iter()
            .map(|t| {
                let d = |a: usize, b: usize| (p[t[a]] - p[t[b]]).norm();
                d(0, 1).max(d(1, 2)).max(d(0, 2))
            })
            .fold(T::zero(), T::max)
    }

    /// Nodal values of `Φ_u`.
    pub fn map_nodes(&self, u: &GaugeFunction<T>) -> Vec<Vec2<T>> {
        let interp = u.interpolant();
        (0..self.n_nodes())
            .into_par_iter()
            .map(|k| {
                let r = self.0.radius[k];
                if r == T::zero() {
                    return Vec2::zero();
                }
                let th = self.0.angle[k];
                Vec2::polar_unit(th).scale(r / interp.eval(th))
            })
            .collect()
    }

    /// The mesh of `Ω_u`.
    pub fn map(&self, u: &GaugeFunction<T>) -> Result<MappedMesh<T>> {
        MappedMesh::new(self.clone(), self.map_nodes(u))
    }
}

pub(crate) fn cross<T: Real>(a: Vec2<T>, b: Vec2<T>) -> T {
    a.x * b.y - a.y * b.x
}

/// Affine element data: area and gradients of the barycentric coordinates.
#[derive(Clone, Copy, Debug)]
pub struct Element<T> {
    pub area: T,
    pub grads: [Vec2<T>; 3],
}

impl<T: Real> Element<T> {
    fn new(p: [Vec2<T>; 3]) -> Option<Self> {
        let e1 = p[1] - p[0];
        let e2 = p[2] - p[0];
        let det = cross(e1, e2);
        if !(det > T::zero()) {
            return None;
        }
        let g1 = Vec2::new(e2.y, -e2.x).scale(T::one() / det);
        let g2 = Vec2::new(-e1.y, e1.x).scale(T::one() / det);
        Some(Self { area: det / T::lit(2.0), grads: [-(g1 + g2), g1, g2] })
    }
}

/// Reference topology with physical node positions.
#[derive(Clone, Debug)]
pub struct MappedMesh<T> {
    base: DiskMesh<T>,
    nodes: Vec<Vec2<T>>,
    elements: Vec<Element<T>>,
}

impl<T: Real> MappedMesh<T> {
    /// Fails with [`Error::DegenerateMesh`] if some element is inverted or flat.
    pub fn new(base: DiskMesh<T>, nodes: Vec<Vec2<T>>) -> Result<Self> {
        if nodes.len() != base.n_nodes() {
            return Err(Error::invalid("node count does not match the reference mesh"));
        }
        let elements: Option<Vec<Element<T>>> = base
            .triangles()
            .par_iter()
            .map(|t| Element::new([nodes[t[0]], nodes[t[1]], nodes[t[2]]]))
            .collect();
        let elements = elements.ok_or_else(|| Error::DegenerateMesh("non-positive element Jacobian".into()))?;
        Ok(Self { base, nodes, elements })
    }

    /// Same topology with every node moved by `disp`.
    pub fn displaced(&self, disp: &[Vec2<T>]) -> Result<Self> {
        let nodes = self.nodes.iter().zip(disp).map(|(&p, &d)| p + d).collect();
        Self::new(self.base.clone(), nodes)
    }

    pub fn base(&self) -> &DiskMesh<T> {
        &self.base
    }

    pub fn nodes(&self) -> &[Vec2<T>] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element<T>] {
        &self.elements
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        self.base.triangles()
    }

    pub fn area(&self) -> T {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// Smallest element area relative to the mean.
    pub fn min_area_ratio(&self) -> T {
        let mean = self.area() / T::from_usize_lossy(self.elements.len());
        self.elements.iter().map(|e| e.area).fold(T::infinity(), T::min) / mean
    }

    /// Physical position of barycentric point `lam` in element `e`.
    pub fn point(&self, e: usize, lam: &[T; 3]) -> Vec2<T> {
        let t = self.base.triangles()[e];
        let mut x = Vec2::zero();
        for i in 0..3 {
            x += self.nodes[t[i]].scale(lam[i]);
        }
        x
    }

    /// Writes nodes, triangles and optional nodal values.
    ///
    /// Layout: `# mesh v1 level=<l> nodes=<n> triangles=<m>`, then rows
    /// `node,<k>,<x>,<y>,<value>` followed by rows `tri,<e>,<i>,<j>,<k>`.
    pub fn write_csv<W: Write>(&self, values: Option<&[T]>, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# mesh v1 level={} nodes={} triangles={}",
            self.base.level(),
            self.nodes.len(),
            self.elements.len()
        )?;
        writeln!(w, "kind,index,a,b,c")?;
        for (k, p) in self.nodes.iter().enumerate() {
            let v = values.map_or(T::zero(), |v| v[k]);
            writeln!(w, "node,{k},{},{},{}", p.x, p.y, v)?;
        }
        for (e, t) in self.base.triangles().iter().enumerate() {
            writeln!(w, "tri,{e},{},{},{}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn level_zero_is_a_fan() {
        let m = build_mesh::<f64>(0).unwrap();
        assert_eq!(m.triangles().len(), 16);
        assert_eq!(m.n_nodes(), 17);
        assert_eq!(m.n_dofs(), 1);
        assert!(m.triangles().iter().all(|t| t[0] == 0));
        assert!(build_mesh::<f64>(10).is_err());
    }

    #[test]
    fn refinement_quadruples_and_nests() {
        for l in 0..5 {
            let a = build_mesh::<f64>(l).unwrap();
            let b = build_mesh::<f64>(l + 1).unwrap();
            assert_eq!(b.triangles().len(), 4 * a.triangles().len());
            assert_eq!(b.boundary_len(), 2 * a.boundary_len());
            for (k, &i) in a.boundary().iter().enumerate() {
                let j = b.boundary()[2 * k];
                assert!((a.nodes()[i] - b.nodes()[j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn boundary_on_unit_circle_and_orientation() {
        let m = build_mesh::<f64>(3).unwrap();
        for &k in m.boundary() {
            assert!((m.nodes()[k].norm() - 1.0).abs() < 1e-15);
            assert!(m.is_boundary(k));
        }
        let u = GaugeFunction::constant(64, 1.0).unwrap();
        let mm = m.map(&u).unwrap();
        assert!(mm.elements().iter().all(|e| e.area > 0.0));
    }

    #[test]
    fn mesh_is_deterministic() {
        let a = build_mesh::<f64>(4).unwrap();
        let b = build_mesh::<f64>(4).unwrap();
        assert_eq!(a.triangles(), b.triangles());
        assert_eq!(a.nodes(), b.nodes());
    }

    #[test]
    fn area_matches_inscribed_polygon() {
        let m = build_mesh::<f64>(6).unwrap();
        let sides = m.boundary_len() as f64;
        let polygon = 0.5 * sides * (2.0 * PI / sides).sin();
        assert!((m.area() - polygon).abs() < 1e-11);
        assert!((m.area() - PI).abs() / PI < 1e-3);
    }

    #[test]
    fn diameter_halves_with_level() {
        let d: Vec<f64> = (2..6).map(|l| build_mesh::<f64>(l).unwrap().max_diameter()).collect();
        for w in d.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 0.05);
        }
        assert!(d[3] * 32.0 < 3.0);
    }

    #[test]
    fn mapped_boundary_lies_on_gauge_boundary() {
        let u = GaugeFunction::from_fn(64, |t: f64| 1.0 + 0.2 * (3.0 * t).cos()).unwrap();
        let m = build_mesh::<f64>(2).unwrap();
        let mm = m.map(&u).unwrap();
        for &k in m.boundary() {
            let p = mm.nodes()[k];
            let th = p.y.atan2(p.x);
            assert!((p.norm() - 1.0 / u.eval(th.rem_euclid(2.0 * PI))).abs() < 1e-12);
        }
        let mut buf = Vec::new();
        mm.write_csv(None, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("# mesh v1 level=2"));
        assert_eq!(s.lines().count(), 2 + mm.nodes().len() + mm.elements().len());
    }

    #[test]
    fn inverted_mesh_is_rejected() {
        let m = build_mesh::<f64>(1).unwrap();
        let mut nodes = m.nodes().to_vec();
        nodes[0] = Vec2::new(2.0, 0.0);
        assert!(matches!(MappedMesh::new(m, nodes), Err(Error::DegenerateMesh(_))));
    }
}

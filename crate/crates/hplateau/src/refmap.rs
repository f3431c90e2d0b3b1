//! Piecewise-linear maps from a planar reference disk and the functionals
//! that live on them.
//!
//! The energy convention has no 1/2 factor: dirichlet_energy integrates the
//! squared gradient norm, so it is bounded below by twice the image area
//! with equality exactly at conformal maps.

use nalgebra::{Matrix2, Point2};

use crate::error::{Error, Result};
use crate::mesh::TriangulatedDisk;
use crate::region::cone_flux;

/// A map u: D -> R^3 stored as a planar reference mesh plus its image;
/// both share the triangle list and indexing of `image`.
#[derive(Clone, Debug)]
pub struct ReferenceMap {
    pub reference: Vec<Point2<f64>>,
    pub image: TriangulatedDisk,
}

impl ReferenceMap {
    pub fn new(reference: Vec<Point2<f64>>, image: TriangulatedDisk) -> Result<Self> {
        if reference.len() != image.vertices.len() {
            return Err(Error::Invalid(format!(
                "reference has {} vertices, image has {}",
                reference.len(),
                image.vertices.len()
            )));
        }
        Ok(ReferenceMap { reference, image })
    }

    /// Integral of |grad u|^2 over the reference disk. Per triangle the
    /// gradient is constant: with P the 2x2 reference edge matrix and Q the
    /// 3x2 image edge matrix, the contribution is |Q P^-1|_F^2 |det P| / 2.
    pub fn dirichlet_energy(&self) -> Result<f64> {
        let mut acc = crate::numeric::NeumaierSum::new();
        for (t, tri) in self.image.triangles.iter().enumerate() {
            let q0 = self.reference[tri[0]];
            let q1 = self.reference[tri[1]];
            let q2 = self.reference[tri[2]];
            let p = Matrix2::from_columns(&[q1 - q0, q2 - q0]);
            let det = p.determinant();
            let scale = (q1 - q0).norm_squared() + (q2 - q0).norm_squared();
            if det.abs() <= 1e-14 * scale {
                return Err(Error::DegenerateReference(t));
            }
            let inv = p.try_inverse().ok_or(Error::DegenerateReference(t))?;
            let [p0, p1, p2] = self.image.tri_points(t);
            let e1 = p1 - p0;
            let e2 = p2 - p0;
            // Columns of Q inv: gradient of u along the two reference axes.
            let gx = e1 * inv[(0, 0)] + e2 * inv[(1, 0)];
            let gy = e1 * inv[(0, 1)] + e2 * inv[(1, 1)];
            acc.add((gx.norm_squared() + gy.norm_squared()) * det.abs() * 0.5);
        }
        Ok(acc.value())
    }

    /// Algebraic volume: flux of the position field through the image. Does
    /// not see the parameterization at all, only the image triangles.
    pub fn algebraic_volume(&self) -> f64 {
        cone_flux(&self.image.vertices, &self.image.triangles)
    }

    /// Bulk functional: Dirichlet energy plus (4/3) h times the algebraic
    /// volume.
    pub fn f_h(&self, h: f64) -> Result<f64> {
        Ok(self.dirichlet_energy()? + (4.0 / 3.0) * h * self.algebraic_volume())
    }
}

/// Reference boundary positions: the unit circle at uniform angles, one per
/// boundary-loop entry, starting at angle 0.
pub fn unit_circle_boundary(n: usize) -> Vec<Point2<f64>> {
    (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
            Point2::new(a.cos(), a.sin())
        })
        .collect()
}

/// Embed a disk mesh in the plane with fixed boundary by iterating the
/// uniform-weight barycenter relation (Tutte). For a convex boundary polygon
/// the limit is an embedding; iteration stops when the largest vertex move
/// falls under `tol`.
pub fn tutte_reference(
    mesh: &TriangulatedDisk,
    boundary_positions: &[Point2<f64>],
    tol: f64,
) -> Result<Vec<Point2<f64>>> {
    if boundary_positions.len() != mesh.boundary_loop.len() {
        return Err(Error::Invalid(format!(
            "got {} boundary positions for a loop of {}",
            boundary_positions.len(),
            mesh.boundary_loop.len()
        )));
    }
    let n = mesh.vertices.len();
    let adjacency = mesh.vertex_adjacency();
    let mut fixed = vec![false; n];
    let mut pos = vec![Point2::origin(); n];
    for (k, &v) in mesh.boundary_loop.iter().enumerate() {
        fixed[v] = true;
        pos[v] = boundary_positions[k];
    }
    let free: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
    // Interior seeds at the boundary centroid; Gauss-Seidel sweeps pull them
    // to the weighted flat configuration.
    let centroid = {
        let mut c = nalgebra::Vector2::zeros();
        for p in boundary_positions {
            c += p.coords;
        }
        Point2::from(c / boundary_positions.len() as f64)
    };
    for &v in &free {
        pos[v] = centroid;
    }
    let max_sweeps = 200 * n.max(64);
    for _ in 0..max_sweeps {
        let mut largest = 0.0f64;
        for &v in &free {
            let nbrs = &adjacency[v];
            if nbrs.is_empty() {
                return Err(Error::InvalidMesh(format!("vertex {v} has no neighbors")));
            }
            let mut c = nalgebra::Vector2::zeros();
            for &w in nbrs {
                c += pos[w].coords;
            }
            let next = Point2::from(c / nbrs.len() as f64);
            largest = largest.max((next - pos[v]).norm());
            pos[v] = next;
        }
        if largest < tol {
            return Ok(pos);
        }
    }
    Err(Error::Invalid(
        "flat embedding did not settle within the sweep budget".into(),
    ))
}

/// Convenience: Tutte reference on the unit circle plus the mesh itself.
pub fn disk_reference_map(mesh: &TriangulatedDisk) -> Result<ReferenceMap> {
    let boundary = unit_circle_boundary(mesh.boundary_loop.len());
    let reference = tutte_reference(mesh, &boundary, 1e-12)?;
    ReferenceMap::new(reference, mesh.clone())
}

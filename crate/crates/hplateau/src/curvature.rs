//! Discrete mean curvature (cotangent weights over mixed Voronoi areas) and
//! the sign test that a candidate minimizer curves out of its enclosed
//! region.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::mesh::TriangulatedDisk;
use crate::metric::MetricField;
use crate::region::EnclosureRegion;

/// Violation threshold: a vertex counts only when the inward component of
/// the curvature vector exceeds this fraction of its magnitude.
pub const CONCAVITY_TOLERANCE: f64 = 0.05;

/// Curvature magnitudes below this scale are treated as flat. The working
/// floor combines it with the prescribed curvature and the mesh extent, so
/// it sits many orders below any real signal; without it a surface that is
/// planar to rounding error would fail the sign test on noise alone.
pub const CURVATURE_NOISE_FLOOR: f64 = 1e-7;

/// Mean curvature vectors at interior vertices. The vector points toward
/// the local center of curvature (into a sphere) and its magnitude is the
/// mean of the principal curvatures. Boundary vertices carry `None`.
#[derive(Clone, Debug)]
pub struct MeanCurvatureField {
    pub vectors: Vec<Option<Vector3<f64>>>,
    /// Mixed Voronoi area around each vertex (boundary vertices included).
    pub mixed_areas: Vec<f64>,
}

impl MeanCurvatureField {
    pub fn interior(&self) -> impl Iterator<Item = (usize, &Vector3<f64>)> + '_ {
        self.vectors
            .iter()
            .enumerate()
            .filter_map(|(v, h)| h.as_ref().map(|h| (v, h)))
    }
}

/// Per-vertex mixed Voronoi areas: the Voronoi cell area inside non-obtuse
/// triangles, half the triangle area at an obtuse corner, a quarter
/// elsewhere in an obtuse triangle.
pub fn mixed_voronoi_areas(mesh: &TriangulatedDisk) -> Vec<f64> {
    let mut areas = vec![0.0f64; mesh.vertices.len()];
    for tri in &mesh.triangles {
        let p = [
            mesh.vertices[tri[0]],
            mesh.vertices[tri[1]],
            mesh.vertices[tri[2]],
        ];
        let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
        let area = 0.5 * e[1].cross(&e[2]).norm();
        // cots[k]: cotangent of the interior angle at corner k.
        let double = e[1].cross(&e[2]).norm();
        if double <= 0.0 {
            // Zero-area star contributions stay zero; the caller reports
            // the vertex if nothing else supports it.
            continue;
        }
        let cots = [
            -e[1].dot(&e[2]) / double,
            -e[2].dot(&e[0]) / double,
            -e[0].dot(&e[1]) / double,
        ];
        if let Some(ob) = cots.iter().position(|&c| c < 0.0) {
            for k in 0..3 {
                areas[tri[k]] += if k == ob { area * 0.5 } else { area * 0.25 };
            }
        } else {
            for k in 0..3 {
                // Voronoi piece at corner k, opposite edge excluded.
                let l1 = e[(k + 1) % 3].norm_squared();
                let l2 = e[(k + 2) % 3].norm_squared();
                areas[tri[k]] += (l1 * cots[(k + 1) % 3] + l2 * cots[(k + 2) % 3]) / 8.0;
            }
        }
    }
    areas
}

/// Cotangent-weight mean curvature vector at every interior vertex,
/// normalized by mixed Voronoi areas. Euclidean metric only.
pub fn mean_curvature(
    mesh: &TriangulatedDisk,
    metric: &MetricField,
) -> Result<MeanCurvatureField> {
    if !matches!(metric, MetricField::Euclidean) {
        return Err(Error::UnsupportedMetric(
            "mean curvature needs the euclidean metric".into(),
        ));
    }
    let n = mesh.vertices.len();
    let mixed_areas = mixed_voronoi_areas(mesh);
    let mut sums = vec![Vector3::<f64>::zeros(); n];
    for tri in &mesh.triangles {
        let p = [
            mesh.vertices[tri[0]],
            mesh.vertices[tri[1]],
            mesh.vertices[tri[2]],
        ];
        let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
        let double = e[1].cross(&e[2]).norm();
        if double <= 0.0 {
            continue;
        }
        for k in 0..3 {
            // The angle at corner k weights the opposite edge (k+1, k+2).
            let cot = -e[(k + 1) % 3].dot(&e[(k + 2) % 3]) / double;
            let a = tri[(k + 1) % 3];
            let b = tri[(k + 2) % 3];
            let d = mesh.vertices[b] - mesh.vertices[a];
            sums[a] += cot * d;
            sums[b] -= cot * d;
        }
    }
    let boundary = mesh.is_boundary_vertex();
    let mut vectors = vec![None; n];
    for v in 0..n {
        if boundary[v] {
            continue;
        }
        let a = mixed_areas[v];
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::ZeroMixedArea(v));
        }
        let h = sums[v] / (4.0 * a);
        if !h.iter().all(|c| c.is_finite()) {
            return Err(Error::ZeroMixedArea(v));
        }
        vectors[v] = Some(h);
    }
    Ok(MeanCurvatureField {
        vectors,
        mixed_areas,
    })
}

/// Interior vertices of the spanning disk whose mean curvature vector
/// points into the enclosed region beyond tolerance. The disk must be
/// oriented with normals out of the enclosed region, which is how
/// enclosures are built here. Vertices whose curvature sits below the
/// noise floor are flat for this purpose and never violate.
pub fn h_concavity_check(region: &EnclosureRegion, h: f64) -> Result<Vec<usize>> {
    h_concavity_violations(region, h, CONCAVITY_TOLERANCE)
}

pub fn h_concavity_violations(
    region: &EnclosureRegion,
    h: f64,
    tau: f64,
) -> Result<Vec<usize>> {
    let field = mean_curvature(&region.disk, &MetricField::Euclidean)?;
    let normals = region.disk.vertex_normals();
    let diag = region.disk.bbox_diagonal().max(1e-300);
    let floor = CURVATURE_NOISE_FLOOR * (h.abs() + 1.0 / diag);
    let mut violations = Vec::new();
    for (v, hv) in field.interior() {
        let mag = hv.norm();
        if mag <= floor {
            continue;
        }
        if hv.dot(&normals[v]) < -tau * mag {
            violations.push(v);
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Point3, Rotation3, Vector3};
    use std::f64::consts::PI;

    use crate::meshing::{flipped, planar_disk, sphere_cap};

    /// Structured latitude/longitude patch of a sphere, 6-valent interior.
    fn sphere_grid(radius: f64, n_theta: usize, n_phi: usize) -> TriangulatedDisk {
        let th = |i: usize| 0.6 + 0.8 * i as f64 / (n_theta - 1) as f64;
        let ph = |j: usize| 1.1 * j as f64 / (n_phi - 1) as f64;
        let mut vertices = Vec::new();
        for i in 0..n_theta {
            for j in 0..n_phi {
                let (t, p) = (th(i), ph(j));
                vertices.push(Point3::new(
                    radius * t.sin() * p.cos(),
                    radius * t.sin() * p.sin(),
                    radius * t.cos(),
                ));
            }
        }
        let id = |i: usize, j: usize| i * n_phi + j;
        let mut triangles = Vec::new();
        for i in 0..n_theta - 1 {
            for j in 0..n_phi - 1 {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut boundary = Vec::new();
        for j in 0..n_phi - 1 {
            boundary.push(id(0, j));
        }
        for i in 0..n_theta - 1 {
            boundary.push(id(i, n_phi - 1));
        }
        for j in (1..n_phi).rev() {
            boundary.push(id(n_theta - 1, j));
        }
        for i in (1..n_theta).rev() {
            boundary.push(id(i, 0));
        }
        TriangulatedDisk::new(vertices, triangles, boundary)
    }

    fn max_sphere_error(mesh: &TriangulatedDisk, radius: f64) -> f64 {
        let field = mean_curvature(mesh, &MetricField::Euclidean).unwrap();
        let mut worst: f64 = 0.0;
        for (v, h) in field.interior() {
            // Exact vector: magnitude 1/radius toward the center.
            let exact = -mesh.vertices[v].coords.normalize() / radius;
            worst = worst.max((h - exact).norm() * radius);
        }
        worst
    }

    #[test]
    fn sphere_curvature_converges_with_refinement() {
        let radius = 2.0;
        let coarse = max_sphere_error(&sphere_grid(radius, 17, 17), radius);
        let fine = max_sphere_error(&sphere_grid(radius, 33, 33), radius);
        let order = (coarse / fine).log2();
        assert!(coarse < 0.02, "coarse error {coarse}");
        assert!(
            order > 1.5,
            "convergence order {order} (coarse {coarse}, fine {fine})"
        );
    }

    #[test]
    fn polar_cap_curvature_points_inward() {
        let radius = 2.0;
        let rim: Vec<Point3<f64>> = (0..128)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 128.0;
                Point3::new(radius * a.cos(), radius * a.sin(), 0.0)
            })
            .collect();
        let cap = sphere_cap(Point3::origin(), radius, Vector3::z(), PI / 2.0, &rim, 20)
            .unwrap();
        let field = mean_curvature(&cap, &MetricField::Euclidean).unwrap();
        for (v, h) in field.interior() {
            let dir = -cap.vertices[v].coords.normalize();
            assert!(
                h.normalize().dot(&dir) > 0.99,
                "vertex {v} direction off: {h:?}"
            );
            let mag = h.norm() * radius;
            assert!((mag - 1.0).abs() < 0.08, "vertex {v} magnitude {mag}");
        }
    }

    #[test]
    fn flat_disk_curvature_vanishes() {
        let disk = planar_disk(1.0, 48, 6);
        let field = mean_curvature(&disk, &MetricField::Euclidean).unwrap();
        for (_, h) in field.interior() {
            assert!(h.norm() < 1e-9);
        }
    }

    #[test]
    fn cylinder_patch_curvature_points_at_axis() {
        // Grid patch of the unit cylinder, diagonal split.
        let (n_a, n_z) = (48, 24);
        let mut vertices = Vec::new();
        for i in 0..n_a {
            for j in 0..n_z {
                let a = 1.4 * i as f64 / (n_a - 1) as f64;
                let z = 1.0 * j as f64 / (n_z - 1) as f64;
                vertices.push(Point3::new(a.cos(), a.sin(), z));
            }
        }
        let id = |i: usize, j: usize| i * n_z + j;
        let mut triangles = Vec::new();
        for i in 0..n_a - 1 {
            for j in 0..n_z - 1 {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut boundary = Vec::new();
        for j in 0..n_z - 1 {
            boundary.push(id(0, j));
        }
        for i in 0..n_a - 1 {
            boundary.push(id(i, n_z - 1));
        }
        for j in (1..n_z).rev() {
            boundary.push(id(n_a - 1, j));
        }
        for i in (1..n_a).rev() {
            boundary.push(id(i, 0));
        }
        let patch = TriangulatedDisk::new(vertices, triangles, boundary);
        let field = mean_curvature(&patch, &MetricField::Euclidean).unwrap();
        let mut count = 0;
        for (v, h) in field.interior() {
            let p = patch.vertices[v];
            let toward_axis = -Vector3::new(p.x, p.y, 0.0).normalize();
            assert!(h.normalize().dot(&toward_axis) > 0.999, "vertex {v}");
            assert!((h.norm() - 0.5).abs() < 0.01, "vertex {v}: {}", h.norm());
            count += 1;
        }
        assert!(count > 100);
    }

    #[test]
    fn rigid_motion_rotates_the_field() {
        let radius = 2.0;
        let mesh = sphere_grid(radius, 13, 13);
        let rot = Rotation3::from_euler_angles(0.4, -1.1, 2.2);
        let shift = Vector3::new(0.3, -5.0, 2.25);
        let mut moved = mesh.clone();
        for p in &mut moved.vertices {
            *p = rot * *p + shift;
        }
        let f0 = mean_curvature(&mesh, &MetricField::Euclidean).unwrap();
        let f1 = mean_curvature(&moved, &MetricField::Euclidean).unwrap();
        for (v, h) in f0.interior() {
            let expect = rot * h;
            let got = f1.vectors[v].unwrap();
            assert!((got - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn degenerate_star_names_the_vertex() {
        // Interior vertex whose entire star is collapsed to a segment.
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(3.0, 0.0, 0.0),
        ];
        let triangles = vec![[0, 1, 2], [1, 3, 2]];
        let mesh = TriangulatedDisk::new(vertices, triangles, vec![0, 3]);
        // Vertices 1 and 2 are off the stated boundary loop, so they are
        // treated as interior; their mixed area is zero.
        let err = mean_curvature(&mesh, &MetricField::Euclidean).unwrap_err();
        match err {
            Error::ZeroMixedArea(v) => assert!(v == 1 || v == 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    /// Lens between a spanning disk bulging below the equator and the
    /// southern cap of the unit sphere, both oriented out of the lens.
    fn lens_region() -> EnclosureRegion {
        let rim: Vec<Point3<f64>> = (0..96)
            .map(|k| {
                // Clockwise seen from above = counterclockwise around -z.
                let a = -2.0 * PI * k as f64 / 96.0;
                Point3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        let shell = sphere_cap(
            Point3::origin(),
            1.0,
            -Vector3::z(),
            PI / 2.0,
            &rim,
            12,
        )
        .unwrap();
        let s3 = 3.0f64.sqrt();
        // Spherical cap of radius 2 through the rim, apex at z = s3 - 2.
        let disk_raw = sphere_cap(
            Point3::new(0.0, 0.0, s3),
            2.0,
            -Vector3::z(),
            PI / 6.0,
            &rim,
            12,
        )
        .unwrap();
        let disk = flipped(&disk_raw);
        EnclosureRegion::new(disk, shell).unwrap()
    }

    #[test]
    fn minimizing_cap_has_no_violations() {
        let region = lens_region();
        assert!(region.enclosed_volume(&MetricField::Euclidean) > 0.0);
        let violations = h_concavity_check(&region, 0.5).unwrap();
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn flipping_the_enclosure_flags_every_interior_vertex() {
        let region = lens_region();
        let disk = flipped(&region.disk);
        let cap = flipped(&region.cap);
        let inverted = EnclosureRegion::new(disk, cap).unwrap();
        assert!(inverted.enclosed_volume(&MetricField::Euclidean) < 0.0);
        let violations = h_concavity_check(&inverted, 0.5).unwrap();
        let interior = inverted.disk.vertices.len() - inverted.disk.boundary_loop.len();
        assert_eq!(violations.len(), interior);
    }

    #[test]
    fn wrong_sided_bulge_is_flagged_locally() {
        // Start from the correct south-bulging lens and dent the middle of
        // the disk upward so the dome top curves into the lens.
        let region = lens_region();
        let mut disk = region.disk.clone();
        for p in &mut disk.vertices {
            let r2 = p.x * p.x + p.y * p.y;
            if r2 < 0.16 {
                let w = (1.0 - r2 / 0.16).powi(2);
                p.z += 0.5 * w;
            }
        }
        let dented = EnclosureRegion::new(disk, region.cap.clone()).unwrap();
        let violations = h_concavity_check(&dented, 0.5).unwrap();
        assert!(!violations.is_empty());
        for &v in &violations {
            let p = dented.disk.vertices[v];
            assert!(
                (p.x * p.x + p.y * p.y).sqrt() < 0.5,
                "violation off the bulge at {p:?}"
            );
        }
    }
}

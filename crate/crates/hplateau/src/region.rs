//! Boundary curves, disk-plus-cap enclosures, and their measures.
//!
//! The enclosed region is always presented as a spanning disk together with
//! one of the two boundary caps it shares its boundary curve with. The two
//! meshes must agree bit-exactly along the shared samples so the union is
//! watertight; all volume formulas assume outward orientation (the disk
//! normal points away from the enclosed region).

use std::collections::HashMap;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::domain::AmbientDomain;
use crate::error::{Error, Result};
use crate::mesh::TriangulatedDisk;
use crate::metric::MetricField;
use crate::numeric::NeumaierSum;

/// Which side of the boundary curve the enclosed region lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn label(&self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" => Ok(Side::Minus),
            "plus" => Ok(Side::Plus),
            other => Err(Error::Invalid(format!(
                "unknown side {other:?}, expected minus or plus"
            ))),
        }
    }
}

/// A Jordan curve on the domain boundary together with the two caps it cuts
/// the boundary into.
///
/// `cap_minus.boundary_loop[k]` coincides with `samples[k]`;
/// `cap_plus.boundary_loop[k]` coincides with `samples[(L - k) % L]` (the
/// two caps induce opposite traversal directions on the shared curve).
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    pub samples: Vec<Point3<f64>>,
    pub cap_minus: TriangulatedDisk,
    pub cap_plus: TriangulatedDisk,
    pub domain: AmbientDomain,
}

impl BoundaryCurve {
    pub fn cap(&self, side: Side) -> &TriangulatedDisk {
        match side {
            Side::Minus => &self.cap_minus,
            Side::Plus => &self.cap_plus,
        }
    }

    /// Check the sample/cap alignment conventions and that both caps are
    /// valid disks.
    pub fn validate(&self) -> Result<()> {
        let l = self.samples.len();
        if l < 3 {
            return Err(Error::Invalid("boundary curve needs >= 3 samples".into()));
        }
        self.cap_minus.ensure_disk()?;
        self.cap_plus.ensure_disk()?;
        if self.cap_minus.boundary_loop.len() != l || self.cap_plus.boundary_loop.len() != l {
            return Err(Error::Invalid(format!(
                "cap boundary loops ({} / {}) do not match sample count {}",
                self.cap_minus.boundary_loop.len(),
                self.cap_plus.boundary_loop.len(),
                l
            )));
        }
        for k in 0..l {
            let pm = self.cap_minus.vertices[self.cap_minus.boundary_loop[k]];
            if pm != self.samples[k] {
                return Err(Error::Invalid(format!(
                    "cap_minus boundary vertex {k} does not coincide with curve sample"
                )));
            }
            let pp = self.cap_plus.vertices[self.cap_plus.boundary_loop[k]];
            if pp != self.samples[(l - k) % l] {
                return Err(Error::Invalid(format!(
                    "cap_plus boundary vertex {k} does not coincide with reversed curve sample"
                )));
            }
        }
        Ok(())
    }

    /// Refine both caps in lock-step. Boundary midpoints stay on the sample
    /// polygon (so the curve geometry is unchanged and disk/cap unions stay
    /// watertight); interior midpoints are re-projected to the domain
    /// boundary surface.
    pub fn refined(&self) -> BoundaryCurve {
        let snap = |domain: AmbientDomain| {
            move |_a: usize, _b: usize, mid: Point3<f64>, on_boundary: bool| {
                if on_boundary {
                    mid
                } else {
                    project_to_boundary_surface(&domain, &mid)
                }
            }
        };
        let cap_minus = self.cap_minus.uniform_refine(snap(self.domain));
        let cap_plus = self.cap_plus.uniform_refine(snap(self.domain));
        let l = self.samples.len();
        let mut samples = Vec::with_capacity(2 * l);
        for k in 0..l {
            let a = self.samples[k];
            let b = self.samples[(k + 1) % l];
            samples.push(a);
            samples.push(Point3::from((a.coords + b.coords) * 0.5));
        }
        BoundaryCurve {
            samples,
            cap_minus,
            cap_plus,
            domain: self.domain,
        }
    }
}

/// Closest point of the domain's boundary surface.
pub fn project_to_boundary_surface(domain: &AmbientDomain, p: &Point3<f64>) -> Point3<f64> {
    match domain {
        AmbientDomain::Ball { radius } => {
            let n = p.coords.norm();
            if n == 0.0 {
                Point3::new(*radius, 0.0, 0.0)
            } else {
                Point3::from(p.coords * (*radius / n))
            }
        }
        AmbientDomain::ModifiedCylinder { .. } => {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            if r == 0.0 {
                Point3::new(crate::metric::BLEND_OUTER_RADIUS, 0.0, p.z)
            } else {
                let s = crate::metric::BLEND_OUTER_RADIUS / r;
                Point3::new(p.x * s, p.y * s, p.z)
            }
        }
    }
}

/// Spanning disk plus the cap that closes it into a watertight surface.
#[derive(Clone, Debug)]
pub struct EnclosureRegion {
    pub disk: TriangulatedDisk,
    pub cap: TriangulatedDisk,
}

impl EnclosureRegion {
    /// Build and check watertightness of the union.
    pub fn new(disk: TriangulatedDisk, cap: TriangulatedDisk) -> Result<Self> {
        let region = EnclosureRegion { disk, cap };
        region.validate_watertight()?;
        Ok(region)
    }

    /// Verify the disk and cap close up into an oriented surface without
    /// boundary. Vertices are merged by exact coordinate equality, so the
    /// shared boundary samples must match bit for bit.
    pub fn validate_watertight(&self) -> Result<()> {
        let mut ids: HashMap<[u64; 3], usize> = HashMap::new();
        let mut next = 0usize;
        let mut id_of = |p: &Point3<f64>| -> usize {
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            *ids.entry(key).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        };

        // (lo, hi) -> net directed count and total uses.
        let mut edges: HashMap<(usize, usize), (i64, u32)> = HashMap::new();
        let mut add_mesh = |mesh: &TriangulatedDisk, ids: &mut dyn FnMut(&Point3<f64>) -> usize| {
            for tri in &mesh.triangles {
                let mapped = [
                    ids(&mesh.vertices[tri[0]]),
                    ids(&mesh.vertices[tri[1]]),
                    ids(&mesh.vertices[tri[2]]),
                ];
                for k in 0..3 {
                    let a = mapped[k];
                    let b = mapped[(k + 1) % 3];
                    let key = (a.min(b), a.max(b));
                    let entry = edges.entry(key).or_insert((0, 0));
                    entry.0 += if a < b { 1 } else { -1 };
                    entry.1 += 1;
                }
            }
        };
        add_mesh(&self.disk, &mut id_of);
        add_mesh(&self.cap, &mut id_of);

        let mut bad: Vec<(usize, usize)> = Vec::new();
        for (&key, &(net, uses)) in &edges {
            if uses != 2 || net != 0 {
                bad.push(key);
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            bad.sort_unstable();
            let count = bad.len();
            bad.truncate(8);
            Err(Error::NotWatertight { count, sample: bad })
        }
    }

    pub fn disk_area(&self, metric: &MetricField) -> f64 {
        surface_area(&self.disk, metric)
    }

    /// Flux of the position field through the cap (Euclidean), three times
    /// the cone volume of the cap over the origin.
    pub fn cap_cone_flux(&self) -> f64 {
        cone_flux(&self.cap.vertices, &self.cap.triangles)
    }

    /// Signed volume enclosed by disk + cap, positive when both are oriented
    /// outward. Under the blended metric the volume element is integrated by
    /// turning it into the flux of a radial field through the boundary.
    pub fn enclosed_volume(&self, metric: &MetricField) -> f64 {
        match metric {
            MetricField::Euclidean => {
                (cone_flux(&self.disk.vertices, &self.disk.triangles)
                    + cone_flux(&self.cap.vertices, &self.cap.triangles))
                    / 3.0
            }
            _ => {
                radial_flux_volume(&self.disk.vertices, &self.disk.triangles, metric)
                    + radial_flux_volume(&self.cap.vertices, &self.cap.triangles, metric)
            }
        }
    }
}

/// Midpoint rule on the reference triangle; exact through quadratics.
const TRI_QUAD_PTS: [(f64, f64); 3] = [(0.5, 0.0), (0.5, 0.5), (0.0, 0.5)];

/// Riemannian surface area of a triangle mesh. The Euclidean branch is the
/// plain cross-product sum; otherwise each triangle is integrated with a
/// three-point midpoint rule against the pulled-back metric.
pub fn surface_area(mesh: &TriangulatedDisk, metric: &MetricField) -> f64 {
    patch_area(&mesh.vertices, &mesh.triangles, metric)
}

/// `surface_area` over a raw vertex/triangle soup, for surface pieces that
/// are not disks (annuli, closed shells).
pub fn patch_area(
    vertices: &[Point3<f64>],
    triangles: &[[usize; 3]],
    metric: &MetricField,
) -> f64 {
    let mut acc = NeumaierSum::new();
    match metric {
        MetricField::Euclidean => {
            for tri in triangles {
                let [p0, p1, p2] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
                acc.add(0.5 * (p1 - p0).cross(&(p2 - p0)).norm());
            }
        }
        _ => {
            for tri in triangles {
                let [p0, p1, p2] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
                let e1 = p1 - p0;
                let e2 = p2 - p0;
                let mut quad = 0.0;
                for &(xi, eta) in &TRI_QUAD_PTS {
                    let q = Point3::from(p0.coords + e1 * xi + e2 * eta);
                    let g = metric.tensor(&q);
                    let a = (g * e1).dot(&e1);
                    let b = (g * e1).dot(&e2);
                    let c = (g * e2).dot(&e2);
                    let det = (a * c - b * b).max(0.0);
                    quad += det.sqrt();
                }
                acc.add(quad / 3.0 * 0.5);
            }
        }
    }
    acc.value()
}

/// Volume enclosed by one closed outward-oriented surface under the metric.
pub fn metric_volume(
    vertices: &[Point3<f64>],
    triangles: &[[usize; 3]],
    metric: &MetricField,
) -> f64 {
    match metric {
        MetricField::Euclidean => cone_flux(vertices, triangles) / 3.0,
        _ => radial_flux_volume(vertices, triangles, metric),
    }
}

/// Sum of (1/2) v0 . (v1 x v2) over the triangles: the flux of the position
/// field through the surface, exactly 3x the enclosed volume for closed
/// outward-oriented surfaces.
pub fn cone_flux(vertices: &[Point3<f64>], triangles: &[[usize; 3]]) -> f64 {
    let mut acc = NeumaierSum::new();
    for tri in triangles {
        let v0 = vertices[tri[0]].coords;
        let v1 = vertices[tri[1]].coords;
        let v2 = vertices[tri[2]].coords;
        acc.add(0.5 * v0.dot(&v1.cross(&v2)));
    }
    acc.value()
}

/// Region made of two triangle fans over a shared rim: a disk fanned from
/// `disk_apex` and a cap fanned from `cap_apex`, wound so the union closes
/// up. The rim may be any closed polygon, planar or not; self-checks use
/// this to get watertight regions from arbitrary coordinates.
pub fn fan_region(
    rim: &[Point3<f64>],
    disk_apex: Point3<f64>,
    cap_apex: Point3<f64>,
) -> Result<EnclosureRegion> {
    let k = rim.len();
    if k < 3 {
        return Err(Error::Invalid(format!("fan rim needs >= 3 vertices, got {k}")));
    }
    let mut disk_v = vec![disk_apex];
    disk_v.extend_from_slice(rim);
    let disk_t: Vec<[usize; 3]> = (0..k).map(|i| [0, 1 + i, 1 + (i + 1) % k]).collect();
    let disk = TriangulatedDisk::new(disk_v, disk_t, (1..=k).collect());
    let mut cap_v = vec![cap_apex];
    cap_v.extend_from_slice(rim);
    let cap_t: Vec<[usize; 3]> = (0..k).map(|i| [0, 1 + (i + 1) % k, 1 + i]).collect();
    let cap = TriangulatedDisk::new(cap_v, cap_t, (1..=k).rev().collect());
    EnclosureRegion::new(disk, cap)
}

/// Volume contribution of one oriented surface under a rotationally
/// symmetric metric, as the flux of h(r) e_r through the surface. The
/// divergence of that field is the metric volume density, so summing this
/// over a closed outward surface gives the enclosed Riemannian volume.
/// Exact on meshes inside the flat region, where the integrand is linear.
fn radial_flux_volume(
    vertices: &[Point3<f64>],
    triangles: &[[usize; 3]],
    metric: &MetricField,
) -> f64 {
    let mut acc = NeumaierSum::new();
    for tri in triangles {
        let p0 = vertices[tri[0]];
        let p1 = vertices[tri[1]];
        let p2 = vertices[tri[2]];
        let e1 = p1 - p0;
        let e2 = p2 - p0;
        let cross = e1.cross(&e2); // 2 * area * normal
        let mut tri_flux = 0.0;
        for &(xi, eta) in &TRI_QUAD_PTS {
            let q = p0.coords + e1 * xi + e2 * eta;
            let r = (q.x * q.x + q.y * q.y).sqrt();
            if r == 0.0 {
                continue;
            }
            let h = metric.radial_flux_potential(r);
            tri_flux += h * (q.x * cross.x + q.y * cross.y) / r;
        }
        acc.add(tri_flux / 3.0 * 0.5);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    /// Triangular prism split into a disk (bottom + sides) and a cap (top).
    fn prism_region(offset: Vector3<f64>) -> EnclosureRegion {
        let h = 0.7;
        let base = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.3, 0.9, 0.0),
        ];
        let mut vertices: Vec<Point3<f64>> = base.iter().map(|p| p + offset).collect();
        for p in &base {
            vertices.push(Point3::new(p.x, p.y, h) + offset);
        }
        // Bottom (outward = -z), then the three side quads (outward).
        let triangles = vec![
            [0, 2, 1],
            [0, 1, 4],
            [0, 4, 3],
            [1, 2, 5],
            [1, 5, 4],
            [2, 0, 3],
            [2, 3, 5],
        ];
        let disk = TriangulatedDisk::new(vertices.clone(), triangles, vec![3, 4, 5]);
        let cap = TriangulatedDisk::new(
            vec![vertices[3], vertices[4], vertices[5]],
            vec![[0, 1, 2]],
            vec![0, 2, 1],
        );
        EnclosureRegion::new(disk, cap).unwrap()
    }

    #[test]
    fn prism_volume_is_base_area_times_height() {
        let region = prism_region(Vector3::zeros());
        let base_area: f64 = 0.5
            * Vector3::new(1.0, 0.0, 0.0)
                .cross(&Vector3::new(0.3, 0.9, 0.0))
                .norm();
        let v = region.enclosed_volume(&MetricField::Euclidean);
        assert!((v - base_area * 0.7).abs() < 1e-14, "v = {v}");
    }

    #[test]
    fn volume_is_translation_invariant() {
        let v0 = prism_region(Vector3::zeros()).enclosed_volume(&MetricField::Euclidean);
        for off in [
            Vector3::new(3.0, -2.0, 5.0),
            Vector3::new(-17.0, 0.25, 1e3),
        ] {
            let v = prism_region(off).enclosed_volume(&MetricField::Euclidean);
            assert!(
                (v - v0).abs() <= 1e-9 * v0.abs().max(1.0),
                "offset {off:?}: {v} vs {v0}"
            );
        }
    }

    #[test]
    fn fan_region_closes_and_measures_the_double_pyramid() {
        let rim = [
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
        ];
        let region = fan_region(
            &rim,
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, -1.0),
        )
        .unwrap();
        let v = region.enclosed_volume(&MetricField::Euclidean);
        assert!((v - 4.0 / 3.0).abs() < 1e-14, "v = {v}");
        assert!(fan_region(&rim[..2], rim[0], rim[1]).is_err());
    }

    #[test]
    fn open_union_reports_gap_edges() {
        let region = prism_region(Vector3::zeros());
        let mut cap = region.cap.clone();
        cap.vertices[0].x += 1e-3;
        let err = EnclosureRegion::new(region.disk.clone(), cap).unwrap_err();
        match err {
            Error::NotWatertight { count, .. } => assert!(count > 0),
            other => panic!("expected watertight failure, got {other}"),
        }
    }

    #[test]
    fn flat_region_blended_volume_matches_euclidean() {
        // Prism close to the axis: the blended metric is exactly flat there.
        let region = prism_region(Vector3::new(0.1, 0.1, -0.3));
        let metric = MetricField::ModifiedCylinder { eps: 0.05 };
        let ve = region.enclosed_volume(&MetricField::Euclidean);
        let vb = region.enclosed_volume(&metric);
        assert!((ve - vb).abs() < 1e-13, "{ve} vs {vb}");
    }

    #[test]
    fn flat_region_blended_area_matches_euclidean() {
        let region = prism_region(Vector3::new(0.05, -0.1, 0.2));
        let metric = MetricField::ModifiedCylinder { eps: 0.05 };
        let ae = surface_area(&region.disk, &MetricField::Euclidean);
        let ab = surface_area(&region.disk, &metric);
        assert!((ae - ab).abs() < 1e-12);
    }

    #[test]
    fn euclidean_area_equals_cross_product_sum() {
        let region = prism_region(Vector3::zeros());
        let direct: f64 = (0..region.disk.triangles.len())
            .map(|t| region.disk.tri_area(t))
            .sum();
        let a = surface_area(&region.disk, &MetricField::Euclidean);
        assert!((a - direct).abs() <= f64::EPSILON * direct);
    }
}

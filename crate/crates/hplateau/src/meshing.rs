//! Mesh builders: structured polar caps on spheres, planar disks, and a
//! generic mesher for arbitrary Jordan regions on the unit sphere
//! (stereographic projection, ear clipping, conforming refinement,
//! flip-guarded smoothing).

use std::f64::consts::PI;

use nalgebra::{Point2, Point3, Vector3};

use crate::error::{Error, Result};
use crate::mesh::TriangulatedDisk;

/// Deterministic orthonormal frame completing `axis`.
pub fn orthonormal_frame(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = if axis.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = (seed - axis * seed.dot(axis)).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

/// Reverse triangle winding and re-index the boundary loop so it still runs
/// in the induced direction (reverse, then rotate so entry 0 is unchanged).
pub fn flipped(mesh: &TriangulatedDisk) -> TriangulatedDisk {
    let mut out = mesh.clone();
    for tri in &mut out.triangles {
        tri.swap(1, 2);
    }
    let l = out.boundary_loop.len();
    if l > 1 {
        let mut loop2 = Vec::with_capacity(l);
        loop2.push(out.boundary_loop[0]);
        for k in 1..l {
            loop2.push(out.boundary_loop[l - k]);
        }
        out.boundary_loop = loop2;
    }
    out
}

/// Triangulate between two rings of vertex indices ordered by increasing
/// phase. The walk advances whichever ring has the nearer next phase, so
/// rings of different sizes stitch cleanly. Triangles are oriented
/// counterclockwise when phases increase counterclockwise in the viewing
/// plane.
pub fn stitch_rings(
    triangles: &mut Vec<[usize; 3]>,
    inner: &[(usize, f64)],
    outer: &[(usize, f64)],
) {
    let ni = inner.len();
    let no = outer.len();
    debug_assert!(ni >= 1 && no >= 2);
    // Start the outer walk at the entry closest in phase to inner[0].
    let base = inner[0].1;
    let wrap = |p: f64| {
        let mut d = p - base;
        while d < 0.0 {
            d += 2.0 * PI;
        }
        while d >= 2.0 * PI {
            d -= 2.0 * PI;
        }
        d
    };
    let mut o0 = 0;
    let mut best = f64::INFINITY;
    for (k, &(_, p)) in outer.iter().enumerate() {
        let d = wrap(p);
        let d = d.min(2.0 * PI - d);
        if d < best {
            best = d;
            o0 = k;
        }
    }
    let mut i = 0usize; // steps taken on inner
    let mut o = 0usize; // steps taken on outer
    while i < ni || o < no {
        let iv = inner[i % ni].0;
        let ov = outer[(o0 + o) % no].0;
        let next_inner = if i < ni {
            wrap(inner[(i + 1) % ni].1) + 2.0 * PI * ((i + 1) / ni) as f64
        } else {
            f64::INFINITY
        };
        let next_outer = if o < no {
            wrap(outer[(o0 + o + 1) % no].1) + 2.0 * PI * ((o + 1) / no) as f64
        } else {
            f64::INFINITY
        };
        if next_outer <= next_inner {
            let ov2 = outer[(o0 + o + 1) % no].0;
            triangles.push([ov, ov2, iv]);
            o += 1;
        } else {
            let iv2 = inner[(i + 1) % ni].0;
            triangles.push([iv2, iv, ov]);
            i += 1;
        }
    }
}

/// Number of vertices used for an interior ring of a polar patch.
fn ring_size(rim: usize, frac: f64) -> usize {
    ((rim as f64 * frac).round() as usize).max(8).min(rim)
}

/// Structured polar patch of the sphere (center, radius): concentric rings
/// from an apex on the axis out to the given rim. The rim points must lie on
/// the sphere at polar angle `theta_max` from the axis with phases
/// increasing counterclockwise around it; they are adopted verbatim so
/// callers can share them bit-exactly with other meshes. Triangles wind
/// counterclockwise seen from outside along the axis, i.e. normals point
/// away from the sphere center.
pub fn sphere_cap(
    center: Point3<f64>,
    radius: f64,
    axis: Vector3<f64>,
    theta_max: f64,
    rim: &[Point3<f64>],
    rings: usize,
) -> Result<TriangulatedDisk> {
    if rim.len() < 3 {
        return Err(Error::Invalid("cap rim needs >= 3 points".into()));
    }
    if !(theta_max > 0.0 && theta_max < PI) {
        return Err(Error::Invalid(format!(
            "cap polar angle {theta_max} out of range"
        )));
    }
    let rings = rings.max(2);
    let (e1, e2) = orthonormal_frame(&axis);
    let phase = |p: &Point3<f64>| {
        let d = p - center;
        d.dot(&e2).atan2(d.dot(&e1))
    };
    let mut vertices = vec![Point3::from(center.coords + axis * radius)];
    let mut triangles = Vec::new();
    let mut prev: Vec<(usize, f64)> = Vec::new();
    let sin_max = theta_max.sin();
    for j in 1..=rings {
        let theta = theta_max * j as f64 / rings as f64;
        let ring: Vec<(usize, f64)> = if j == rings {
            rim.iter().map(|p| (0usize, phase(p))).enumerate()
                .map(|(k, (_, ph))| (vertices.len() + k, ph))
                .collect()
        } else {
            let k = ring_size(rim.len(), theta.sin() / sin_max);
            (0..k)
                .map(|t| (vertices.len() + t, 2.0 * PI * t as f64 / k as f64))
                .collect()
        };
        if j == rings {
            vertices.extend_from_slice(rim);
        } else {
            for &(_, ph) in &ring {
                let dir = axis * theta.cos() + (e1 * ph.cos() + e2 * ph.sin()) * theta.sin();
                vertices.push(Point3::from(center.coords + dir * radius));
            }
        }
        if j == 1 {
            let k = ring.len();
            for t in 0..k {
                triangles.push([0, ring[t].0, ring[(t + 1) % k].0]);
            }
        } else {
            stitch_rings(&mut triangles, &prev, &ring);
        }
        prev = ring;
    }
    let boundary_loop: Vec<usize> = prev.iter().map(|&(v, _)| v).collect();
    let mesh = TriangulatedDisk::new(vertices, triangles, boundary_loop);
    mesh.ensure_disk()?;
    Ok(mesh)
}

/// Flat disk in the z = 0 plane, radius `r`, polar layout. Normals point up.
pub fn planar_disk(r: f64, rim: usize, rings: usize) -> TriangulatedDisk {
    let rim_pts: Vec<Point3<f64>> = (0..rim)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / rim as f64;
            Point3::new(r * a.cos(), r * a.sin(), 0.0)
        })
        .collect();
    let rings = rings.max(2);
    let mut vertices = vec![Point3::origin()];
    let mut triangles = Vec::new();
    let mut prev: Vec<(usize, f64)> = Vec::new();
    for j in 1..=rings {
        let rj = r * j as f64 / rings as f64;
        let ring: Vec<(usize, f64)> = if j == rings {
            rim_pts
                .iter()
                .enumerate()
                .map(|(k, p)| (vertices.len() + k, p.y.atan2(p.x)))
                .collect()
        } else {
            let k = ring_size(rim, j as f64 / rings as f64);
            (0..k)
                .map(|t| (vertices.len() + t, 2.0 * PI * t as f64 / k as f64))
                .collect()
        };
        if j == rings {
            vertices.extend_from_slice(&rim_pts);
        } else {
            for &(_, ph) in &ring {
                vertices.push(Point3::new(rj * ph.cos(), rj * ph.sin(), 0.0));
            }
        }
        if j == 1 {
            let k = ring.len();
            for t in 0..k {
                triangles.push([0, ring[t].0, ring[(t + 1) % k].0]);
            }
        } else {
            stitch_rings(&mut triangles, &prev, &ring);
        }
        prev = ring;
    }
    let boundary_loop: Vec<usize> = prev.iter().map(|&(v, _)| v).collect();
    TriangulatedDisk::new(vertices, triangles, boundary_loop)
}

/// Ear-clip a simple polygon given in counterclockwise order. O(n^2); the
/// scan always clips the first valid ear, so the result is deterministic.
pub fn ear_clip(poly: &[Point2<f64>]) -> Result<Vec<[usize; 3]>> {
    let n = poly.len();
    if n < 3 {
        return Err(Error::Invalid("polygon needs >= 3 vertices".into()));
    }
    let cross = |a: Point2<f64>, b: Point2<f64>, c: Point2<f64>| {
        (b - a).perp(&(c - a))
    };
    let mut idx: Vec<usize> = (0..n).collect();
    let mut triangles = Vec::with_capacity(n - 2);
    let mut scan = 0usize;
    let mut since_clip = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let i0 = idx[scan % m];
        let i1 = idx[(scan + 1) % m];
        let i2 = idx[(scan + 2) % m];
        let area2 = cross(poly[i0], poly[i1], poly[i2]);
        let mut ok = area2 > 1e-14;
        if ok {
            for &j in &idx {
                if j == i0 || j == i1 || j == i2 {
                    continue;
                }
                let p = poly[j];
                if cross(poly[i0], poly[i1], p) >= 0.0
                    && cross(poly[i1], poly[i2], p) >= 0.0
                    && cross(poly[i2], poly[i0], p) >= 0.0
                {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            triangles.push([i0, i1, i2]);
            idx.remove((scan + 1) % m);
            since_clip = 0;
        } else {
            scan += 1;
            since_clip += 1;
            if since_clip > m {
                return Err(Error::Invalid(
                    "polygon not simple or badly degenerate (no ear found)".into(),
                ));
            }
        }
        if scan >= idx.len() {
            scan = 0;
        }
    }
    triangles.push([idx[0], idx[1], idx[2]]);
    Ok(triangles)
}

/// One conforming refinement round in the plane: every interior edge longer
/// than `max_len` is split at its midpoint, then each triangle is subdivided
/// according to which of its edges were split (1 -> 2, 2 -> 3, 3 -> 4).
/// Boundary edges are never split, so the rim stays verbatim.
fn split_long_interior_edges(
    pts: &mut Vec<Point2<f64>>,
    tris: &[[usize; 3]],
    boundary_edge: &dyn Fn(usize, usize) -> bool,
    max_len: f64,
) -> Vec<[usize; 3]> {
    use std::collections::HashMap;
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    // Deterministic midpoint ids: scan triangles in order.
    for tri in tris {
        for e in 0..3 {
            let a = tri[e];
            let b = tri[(e + 1) % 3];
            if boundary_edge(a, b) || mid.contains_key(&key(a, b)) {
                continue;
            }
            if (pts[a] - pts[b]).norm() > max_len {
                let p = Point2::from((pts[a].coords + pts[b].coords) * 0.5);
                mid.insert(key(a, b), pts.len());
                pts.push(p);
            }
        }
    }
    let mut out = Vec::with_capacity(tris.len() * 2);
    for tri in tris {
        let m: [Option<usize>; 3] = [
            mid.get(&key(tri[0], tri[1])).copied(),
            mid.get(&key(tri[1], tri[2])).copied(),
            mid.get(&key(tri[2], tri[0])).copied(),
        ];
        match m.iter().filter(|x| x.is_some()).count() {
            0 => out.push(*tri),
            1 => {
                // Rotate so the split edge is (0,1).
                let r = m.iter().position(|x| x.is_some()).unwrap();
                let (a, b, c) = (tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]);
                let ab = m[r].unwrap();
                out.push([a, ab, c]);
                out.push([ab, b, c]);
            }
            2 => {
                let r = (0..3).position(|k| m[k].is_none()).unwrap();
                // Unsplit edge is (r, r+1); split edges share vertex r+2.
                let (a, b, c) = (tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]);
                let bc = m[(r + 1) % 3].unwrap();
                let ca = m[(r + 2) % 3].unwrap();
                out.push([ca, a, b]);
                out.push([ca, b, bc]);
                out.push([ca, bc, c]);
            }
            _ => {
                let ab = m[0].unwrap();
                let bc = m[1].unwrap();
                let ca = m[2].unwrap();
                out.push([tri[0], ab, ca]);
                out.push([ab, tri[1], bc]);
                out.push([ca, bc, tri[2]]);
                out.push([ab, bc, ca]);
            }
        }
    }
    out
}

/// Damped barycentric smoothing of free vertices with a fold guard: a move
/// is kept only if every incident triangle keeps positive area.
fn smooth_planar(
    pts: &mut [Point2<f64>],
    tris: &[[usize; 3]],
    fixed: &[bool],
    sweeps: usize,
    damping: f64,
) {
    let n = pts.len();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, tri) in tris.iter().enumerate() {
        for e in 0..3 {
            let a = tri[e];
            let b = tri[(e + 1) % 3];
            nbrs[a].push(b);
            nbrs[b].push(a);
            incident[tri[e]].push(t);
        }
    }
    for lst in &mut nbrs {
        lst.sort_unstable();
        lst.dedup();
    }
    let area2 = |p: &[Point2<f64>], tri: &[usize; 3]| {
        (p[tri[1]] - p[tri[0]]).perp(&(p[tri[2]] - p[tri[0]]))
    };
    for _ in 0..sweeps {
        for v in 0..n {
            if fixed[v] || nbrs[v].is_empty() {
                continue;
            }
            let mut c = nalgebra::Vector2::zeros();
            for &w in &nbrs[v] {
                c += pts[w].coords;
            }
            let target = c / nbrs[v].len() as f64;
            let old = pts[v];
            let next = Point2::from(old.coords + (target - old.coords) * damping);
            pts[v] = next;
            let ok = incident[v].iter().all(|&t| area2(pts, &tris[t]) > 1e-14);
            if !ok {
                pts[v] = old;
            }
        }
    }
}

/// Mesh the Jordan region of the unit sphere bounded by `samples` and not
/// containing `view`. The region is flattened by stereographic projection
/// from `view`, ear-clipped, refined until interior edges are comparable to
/// the rim spacing, smoothed, and lifted back; added interior vertices are
/// normalized onto the sphere. The boundary loop is exactly `samples` in the
/// given order, and triangle winding induces that order.
pub fn mesh_spherical_region(
    samples: &[Point3<f64>],
    view: Point3<f64>,
    rounds: usize,
) -> Result<TriangulatedDisk> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Invalid("region rim needs >= 3 samples".into()));
    }
    let q = view.coords.normalize();
    let (u1, u2) = orthonormal_frame(&q);
    let project = |p: &Point3<f64>| -> Result<Point2<f64>> {
        let d = p.coords.normalize();
        let denom = 1.0 - d.dot(&q);
        if denom < 1e-9 {
            return Err(Error::Invalid(
                "region touches the projection point".into(),
            ));
        }
        Ok(Point2::new(d.dot(&u1) / denom, d.dot(&u2) / denom))
    };
    let lift = |w: Point2<f64>| -> Point3<f64> {
        let ww = w.coords.norm_squared();
        let d = (q * (ww - 1.0) + (u1 * w.x + u2 * w.y) * 2.0) / (ww + 1.0);
        Point3::from(d)
    };
    let mut pts: Vec<Point2<f64>> = Vec::with_capacity(n);
    for p in samples {
        pts.push(project(p)?);
    }
    // Ear clipping wants counterclockwise input.
    let mut area2 = 0.0;
    for k in 0..n {
        let a = pts[k];
        let b = pts[(k + 1) % n];
        area2 += a.x * b.y - b.x * a.y;
    }
    let reversed = area2 < 0.0;
    let order: Vec<usize> = if reversed {
        (0..n).rev().collect()
    } else {
        (0..n).collect()
    };
    let ccw: Vec<Point2<f64>> = order.iter().map(|&k| pts[k]).collect();
    let tris_ccw = ear_clip(&ccw)?;
    // Back to original sample indexing.
    let mut tris: Vec<[usize; 3]> = tris_ccw
        .iter()
        .map(|t| [order[t[0]], order[t[1]], order[t[2]]])
        .collect();
    // Refine until interior edges are comparable to the rim spacing.
    let rim_len: f64 = (0..n)
        .map(|k| (pts[(k + 1) % n] - pts[k]).norm())
        .sum::<f64>();
    let target = 1.8 * rim_len / n as f64;
    let boundary_edge = |a: usize, b: usize| {
        a < n && b < n && ((a + 1) % n == b || (b + 1) % n == a)
    };
    for _ in 0..rounds {
        let before = tris.len();
        tris = split_long_interior_edges(&mut pts, &tris, &boundary_edge, target);
        let mut fixed = vec![false; pts.len()];
        for f in fixed.iter_mut().take(n) {
            *f = true;
        }
        smooth_planar(&mut pts, &tris, &fixed, 12, 0.6);
        if tris.len() == before {
            break;
        }
    }
    // Planar triangles are counterclockwise in projected coordinates, so
    // they induce the rim in planar-ccw order. Flip if that is the reverse
    // of the order the caller gave.
    if reversed {
        for tri in &mut tris {
            tri.swap(1, 2);
        }
    }
    let mut vertices: Vec<Point3<f64>> = Vec::with_capacity(pts.len());
    vertices.extend_from_slice(samples);
    for w in pts.iter().skip(n) {
        vertices.push(lift(*w));
    }
    let boundary_loop: Vec<usize> = (0..n).collect();
    let mesh = TriangulatedDisk::new(vertices, tris, boundary_loop);
    mesh.ensure_disk()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricField;
    use crate::region::surface_area;

    #[test]
    fn polar_cap_matches_closed_form_area() {
        let rim: Vec<Point3<f64>> = (0..96)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 96.0;
                Point3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        // Upper unit hemisphere.
        let cap = sphere_cap(Point3::origin(), 1.0, Vector3::z(), PI / 2.0, &rim, 16).unwrap();
        let a = surface_area(&cap, &MetricField::Euclidean);
        assert!((a - 2.0 * PI).abs() / (2.0 * PI) < 4e-3, "area {a}");
        let rep = cap.validate();
        assert!(rep.is_disk, "{rep:?}");
        // Outward orientation: triangle normals point away from the center.
        for t in 0..cap.triangles.len() {
            let [p0, p1, p2] = cap.tri_points(t);
            let nrm = (p1 - p0).cross(&(p2 - p0));
            let c = (p0.coords + p1.coords + p2.coords) / 3.0;
            assert!(nrm.dot(&c) > 0.0, "triangle {t} inward");
        }
    }

    #[test]
    fn cap_adopts_rim_verbatim() {
        let rim: Vec<Point3<f64>> = (0..40)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 40.0;
                Point3::new(0.9 * a.cos(), 0.9 * a.sin(), (1.0f64 - 0.81).sqrt())
            })
            .collect();
        let theta = (0.9f64).asin();
        let cap = sphere_cap(Point3::origin(), 1.0, Vector3::z(), theta, &rim, 8).unwrap();
        for (k, &v) in cap.boundary_loop.iter().enumerate() {
            assert_eq!(cap.vertices[v], rim[k]);
        }
    }

    #[test]
    fn planar_disk_is_valid_and_flat() {
        let d = planar_disk(1.0, 64, 8);
        assert!(d.validate().is_disk);
        let a = surface_area(&d, &MetricField::Euclidean);
        assert!((a - PI).abs() / PI < 4e-3);
    }

    #[test]
    fn flipped_mesh_still_validates() {
        let d = planar_disk(1.0, 32, 4);
        let f = flipped(&d);
        assert!(f.validate().is_disk, "{:?}", f.validate());
        // Normals reversed.
        let [p0, p1, p2] = f.tri_points(0);
        assert!((p1 - p0).cross(&(p2 - p0)).z < 0.0);
    }

    #[test]
    fn ear_clip_handles_nonconvex_polygon() {
        // L-shape.
        let poly = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let tris = ear_clip(&poly).unwrap();
        assert_eq!(tris.len(), poly.len() - 2);
        let total: f64 = tris
            .iter()
            .map(|t| 0.5 * (poly[t[1]] - poly[t[0]]).perp(&(poly[t[2]] - poly[t[0]])))
            .sum();
        assert!((total - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spherical_region_mesher_reproduces_polar_cap() {
        let n = 128;
        let z0 = 0.25f64;
        let rho = (1.0 - z0 * z0).sqrt();
        let rim: Vec<Point3<f64>> = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Point3::new(rho * a.cos(), rho * a.sin(), z0)
            })
            .collect();
        // Region above the circle, viewed from the south pole.
        let mesh = mesh_spherical_region(&rim, Point3::new(0.0, 0.0, -1.0), 4).unwrap();
        assert!(mesh.validate().is_disk);
        for (k, &v) in mesh.boundary_loop.iter().enumerate() {
            assert_eq!(mesh.vertices[v], rim[k]);
        }
        for p in &mesh.vertices {
            assert!((p.coords.norm() - 1.0).abs() < 1e-12);
        }
        let a = surface_area(&mesh, &MetricField::Euclidean);
        let exact = 2.0 * PI * (1.0 - z0);
        assert!((a - exact).abs() / exact < 0.02, "area {a} vs {exact}");
    }

    #[test]
    fn spherical_region_mesher_handles_wiggly_rims() {
        // Flower-shaped rim around the north pole.
        let n = 240;
        let rim: Vec<Point3<f64>> = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                let theta = 0.9 + 0.25 * (5.0 * a).sin();
                Point3::new(
                    theta.sin() * a.cos(),
                    theta.sin() * a.sin(),
                    theta.cos(),
                )
            })
            .collect();
        let mesh = mesh_spherical_region(&rim, Point3::new(0.0, 0.0, -1.0), 4).unwrap();
        assert!(mesh.validate().is_disk);
        assert!(mesh.vertices.len() > n);
    }
}

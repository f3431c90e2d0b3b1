//! Triangulated disks and their structural checks.
//!
//! A `TriangulatedDisk` is a triangle mesh meant to be homeomorphic to a
//! disk: Euler characteristic 1, a single boundary cycle, consistent
//! triangle orientation, no degenerate triangles. Construction does not
//! enforce this (several tests and fixtures need to inspect broken or
//! closed meshes), `validate` reports the facts and `ensure_disk` turns
//! them into errors.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// Triangles with area below this factor times the squared bounding box
/// diagonal are reported as degenerate.
pub const DEGENERATE_AREA_FACTOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TriangulatedDisk {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary vertices in cyclic order, following the direction induced by
    /// the triangle orientation.
    pub boundary_loop: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub triangle_count: usize,
    pub euler_characteristic: i64,
    pub boundary_cycles: usize,
    pub orientation_consistent: bool,
    pub nonmanifold_edge_count: usize,
    pub degenerate_triangles: Vec<usize>,
    pub boundary_matches_loop: bool,
    pub nonfinite_vertex_count: usize,
    pub unreferenced_vertex_count: usize,
    pub index_error_count: usize,
    pub min_triangle_quality: f64,
    pub is_disk: bool,
}

impl TriangulatedDisk {
    pub fn new(
        vertices: Vec<Point3<f64>>,
        triangles: Vec<[usize; 3]>,
        boundary_loop: Vec<usize>,
    ) -> Self {
        Self {
            vertices,
            triangles,
            boundary_loop,
        }
    }

    #[inline]
    pub fn tri_points(&self, t: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Twice-area normal vector of triangle `t` (not normalized).
    #[inline]
    pub fn tri_cross(&self, t: usize) -> Vector3<f64> {
        let [p0, p1, p2] = self.tri_points(t);
        (p1 - p0).cross(&(p2 - p0))
    }

    #[inline]
    pub fn tri_area(&self, t: usize) -> f64 {
        0.5 * self.tri_cross(t).norm()
    }

    pub fn bbox(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    /// Map from sorted vertex pair to the list of (triangle, direction) uses.
    /// `direction` is true when the triangle traverses the edge from the
    /// smaller to the larger vertex index.
    pub(crate) fn edge_uses(&self) -> HashMap<(usize, usize), Vec<(usize, bool)>> {
        let mut edges: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                if a == b {
                    continue;
                }
                let key = (a.min(b), a.max(b));
                edges.entry(key).or_default().push((t, a < b));
            }
        }
        edges
    }

    pub fn validate(&self) -> ValidationReport {
        let vertex_count = self.vertices.len();
        let triangle_count = self.triangles.len();

        let nonfinite_vertex_count = self
            .vertices
            .iter()
            .filter(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
            .count();

        let mut index_error_count = 0usize;
        let mut referenced = vec![false; vertex_count];
        for tri in &self.triangles {
            let [a, b, c] = *tri;
            if a >= vertex_count || b >= vertex_count || c >= vertex_count {
                index_error_count += 1;
                continue;
            }
            if a == b || b == c || a == c {
                index_error_count += 1;
            }
            referenced[a] = true;
            referenced[b] = true;
            referenced[c] = true;
        }
        for &v in &self.boundary_loop {
            if v >= vertex_count {
                index_error_count += 1;
            } else {
                referenced[v] = true;
            }
        }
        let unreferenced_vertex_count = referenced.iter().filter(|r| !**r).count();

        if index_error_count > 0 || nonfinite_vertex_count > 0 {
            return ValidationReport {
                vertex_count,
                edge_count: 0,
                triangle_count,
                euler_characteristic: 0,
                boundary_cycles: 0,
                orientation_consistent: false,
                nonmanifold_edge_count: 0,
                degenerate_triangles: Vec::new(),
                boundary_matches_loop: false,
                nonfinite_vertex_count,
                unreferenced_vertex_count,
                index_error_count,
                min_triangle_quality: 0.0,
                is_disk: false,
            };
        }

        let edges = self.edge_uses();
        let edge_count = edges.len();
        let euler_characteristic =
            vertex_count as i64 - edge_count as i64 + triangle_count as i64;

        let mut orientation_consistent = true;
        let mut nonmanifold_edge_count = 0usize;
        // Directed successor map over boundary edges, following triangle
        // orientation. A disk boundary is one cycle in this map.
        let mut succ: HashMap<usize, Vec<usize>> = HashMap::new();
        for (&(lo, hi), uses) in &edges {
            match uses.len() {
                1 => {
                    let (_, fwd) = uses[0];
                    let (tail, head) = if fwd { (lo, hi) } else { (hi, lo) };
                    succ.entry(tail).or_default().push(head);
                }
                2 => {
                    if uses[0].1 == uses[1].1 {
                        orientation_consistent = false;
                    }
                }
                _ => nonmanifold_edge_count += 1,
            }
        }

        let mut boundary_cycles = 0usize;
        let mut traced_cycle: Vec<usize> = Vec::new();
        {
            let mut visited: HashMap<usize, bool> = HashMap::new();
            let mut starts: Vec<usize> = succ.keys().copied().collect();
            starts.sort_unstable();
            for &start in &starts {
                if visited.get(&start).copied().unwrap_or(false) {
                    continue;
                }
                let mut cycle = Vec::new();
                let mut cur = start;
                loop {
                    if visited.get(&cur).copied().unwrap_or(false) {
                        break;
                    }
                    visited.insert(cur, true);
                    cycle.push(cur);
                    let nexts = match succ.get(&cur) {
                        Some(n) => n,
                        None => break,
                    };
                    if nexts.len() != 1 {
                        // Pinched boundary vertex; walk ends here.
                        break;
                    }
                    cur = nexts[0];
                    if cur == start {
                        break;
                    }
                }
                boundary_cycles += 1;
                if traced_cycle.is_empty() {
                    traced_cycle = cycle;
                }
            }
        }

        let boundary_matches_loop = if boundary_cycles == 1
            && !self.boundary_loop.is_empty()
            && traced_cycle.len() == self.boundary_loop.len()
        {
            match traced_cycle.iter().position(|&v| v == self.boundary_loop[0]) {
                Some(off) => {
                    let n = traced_cycle.len();
                    (0..n).all(|k| traced_cycle[(off + k) % n] == self.boundary_loop[k])
                }
                None => false,
            }
        } else {
            boundary_cycles == 0 && self.boundary_loop.is_empty()
        };

        let diag = self.bbox_diagonal();
        let area_tol = DEGENERATE_AREA_FACTOR * diag * diag;
        let mut degenerate_triangles = Vec::new();
        let mut min_triangle_quality = f64::INFINITY;
        for t in 0..triangle_count {
            let area = self.tri_area(t);
            if area <= area_tol {
                degenerate_triangles.push(t);
                min_triangle_quality = 0.0;
                continue;
            }
            let [p0, p1, p2] = self.tri_points(t);
            let l2 = (p1 - p0).norm_squared() + (p2 - p1).norm_squared() + (p0 - p2).norm_squared();
            // 1 for equilateral, -> 0 as the triangle collapses.
            let q = 4.0 * 3.0_f64.sqrt() * area / l2;
            min_triangle_quality = min_triangle_quality.min(q);
        }
        if triangle_count == 0 {
            min_triangle_quality = 0.0;
        }

        let is_disk = euler_characteristic == 1
            && boundary_cycles == 1
            && orientation_consistent
            && nonmanifold_edge_count == 0
            && degenerate_triangles.is_empty()
            && boundary_matches_loop
            && unreferenced_vertex_count == 0
            && triangle_count > 0;

        ValidationReport {
            vertex_count,
            edge_count,
            triangle_count,
            euler_characteristic,
            boundary_cycles,
            orientation_consistent,
            nonmanifold_edge_count,
            degenerate_triangles,
            boundary_matches_loop,
            nonfinite_vertex_count,
            unreferenced_vertex_count,
            index_error_count,
            min_triangle_quality,
            is_disk,
        }
    }

    pub fn ensure_disk(&self) -> Result<()> {
        let report = self.validate();
        if report.is_disk {
            return Ok(());
        }
        if let Some(&t) = report.degenerate_triangles.first() {
            let diag = self.bbox_diagonal();
            return Err(Error::DegenerateTriangle {
                index: t,
                area: self.tri_area(t),
                tol: DEGENERATE_AREA_FACTOR * diag * diag,
            });
        }
        Err(Error::InvalidMesh(format!(
            "chi = {}, boundary cycles = {}, oriented = {}, nonmanifold edges = {}, \
             boundary matches loop = {}, index errors = {}, nonfinite vertices = {}",
            report.euler_characteristic,
            report.boundary_cycles,
            report.orientation_consistent,
            report.nonmanifold_edge_count,
            report.boundary_matches_loop,
            report.index_error_count,
            report.nonfinite_vertex_count,
        )))
    }

    pub fn is_boundary_vertex(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for &v in &self.boundary_loop {
            flags[v] = true;
        }
        flags
    }

    /// Graph distance (in edges) from the boundary loop. Boundary vertices
    /// get 0. Unreachable vertices get usize::MAX.
    pub fn ring_depth(&self) -> Vec<usize> {
        let adj = self.vertex_adjacency();
        let mut depth = vec![usize::MAX; self.vertices.len()];
        let mut queue = std::collections::VecDeque::new();
        for &v in &self.boundary_loop {
            if depth[v] == usize::MAX {
                depth[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        depth
    }

    pub fn vertex_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut inc: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                inc[v].push(t);
            }
        }
        inc
    }

    /// Area-weighted vertex normals, normalized where possible.
    pub fn vertex_normals(&self) -> Vec<Vector3<f64>> {
        let mut normals = vec![Vector3::zeros(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let cross = self.tri_cross(t);
            for &v in tri {
                normals[v] += cross;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        normals
    }

    /// Uniform 1-to-4 refinement. `snap` receives the endpoints of each split
    /// edge, the naive midpoint, and whether the edge lies on the boundary,
    /// and returns the position of the inserted vertex.
    pub fn uniform_refine<F>(&self, mut snap: F) -> TriangulatedDisk
    where
        F: FnMut(usize, usize, Point3<f64>, bool) -> Point3<f64>,
    {
        let mut boundary_edge: HashMap<(usize, usize), bool> = HashMap::new();
        let edges = self.edge_uses();
        for (key, uses) in &edges {
            boundary_edge.insert(*key, uses.len() == 1);
        }

        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut keys: Vec<(usize, usize)> = edges.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let (a, b) = key;
            let mid = Point3::from((vertices[a].coords + vertices[b].coords) * 0.5);
            let on_boundary = boundary_edge[&key];
            let pos = snap(a, b, mid, on_boundary);
            midpoint.insert(key, vertices.len());
            vertices.push(pos);
        }

        let mid_of = |a: usize, b: usize| midpoint[&(a.min(b), a.max(b))];
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        for tri in &self.triangles {
            let [a, b, c] = *tri;
            let mab = mid_of(a, b);
            let mbc = mid_of(b, c);
            let mca = mid_of(c, a);
            triangles.push([a, mab, mca]);
            triangles.push([b, mbc, mab]);
            triangles.push([c, mca, mbc]);
            triangles.push([mab, mbc, mca]);
        }

        let mut boundary_loop = Vec::with_capacity(self.boundary_loop.len() * 2);
        let n = self.boundary_loop.len();
        for k in 0..n {
            let u = self.boundary_loop[k];
            let v = self.boundary_loop[(k + 1) % n];
            boundary_loop.push(u);
            boundary_loop.push(mid_of(u, v));
        }

        TriangulatedDisk::new(vertices, triangles, boundary_loop)
    }

    pub fn translated(&self, offset: Vector3<f64>) -> TriangulatedDisk {
        let mut out = self.clone();
        for p in &mut out.vertices {
            *p += offset;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_fan_disk() -> TriangulatedDisk {
        // Hexagon fan around a center vertex.
        let mut vertices = vec![Point3::new(0.0, 0.0, 0.0)];
        for k in 0..6 {
            let a = std::f64::consts::TAU * k as f64 / 6.0;
            vertices.push(Point3::new(a.cos(), a.sin(), 0.0));
        }
        let mut triangles = Vec::new();
        for k in 0..6 {
            triangles.push([0, 1 + k, 1 + (k + 1) % 6]);
        }
        TriangulatedDisk::new(vertices, triangles, vec![1, 2, 3, 4, 5, 6])
    }

    fn tetrahedron() -> TriangulatedDisk {
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        // Outward-oriented closed surface.
        let triangles = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        TriangulatedDisk::new(vertices, triangles, vec![])
    }

    #[test]
    fn fan_disk_validates_as_disk() {
        let disk = flat_fan_disk();
        let report = disk.validate();
        assert_eq!(report.euler_characteristic, 1);
        assert_eq!(report.boundary_cycles, 1);
        assert!(report.orientation_consistent);
        assert!(report.boundary_matches_loop);
        assert!(report.degenerate_triangles.is_empty());
        assert!(report.is_disk);
        disk.ensure_disk().unwrap();
    }

    #[test]
    fn tetrahedron_is_closed_not_disk() {
        let report = tetrahedron().validate();
        assert_eq!(report.euler_characteristic, 2);
        assert_eq!(report.boundary_cycles, 0);
        assert!(report.orientation_consistent);
        assert!(!report.is_disk);
    }

    #[test]
    fn flipped_triangle_breaks_orientation() {
        let mut disk = flat_fan_disk();
        disk.triangles[2].swap(1, 2);
        let report = disk.validate();
        assert!(!report.orientation_consistent);
        assert!(!report.is_disk);
    }

    #[test]
    fn duplicate_vertex_triangle_is_degenerate() {
        let mut disk = flat_fan_disk();
        // Collapse one rim vertex onto its neighbor; triangle 1 = [0, 2, 3]
        // loses its area.
        let src = disk.vertices[2];
        disk.vertices[3] = src;
        let report = disk.validate();
        assert!(report.degenerate_triangles.contains(&1));
        assert!(!report.is_disk);
        let err = disk.ensure_disk().unwrap_err();
        assert!(err.to_string().contains("degenerate triangle"));
    }

    #[test]
    fn boundary_loop_mismatch_detected() {
        let mut disk = flat_fan_disk();
        disk.boundary_loop = vec![1, 3, 2, 4, 5, 6];
        let report = disk.validate();
        assert!(!report.boundary_matches_loop);
        assert!(!report.is_disk);
    }

    #[test]
    fn refine_preserves_disk_and_quarters_area() {
        let disk = flat_fan_disk();
        let area: f64 = (0..disk.triangles.len()).map(|t| disk.tri_area(t)).sum();
        let fine = disk.uniform_refine(|_, _, mid, _| mid);
        let fine_area: f64 = (0..fine.triangles.len()).map(|t| fine.tri_area(t)).sum();
        assert!(fine.validate().is_disk);
        assert_eq!(fine.triangles.len(), disk.triangles.len() * 4);
        assert!((area - fine_area).abs() < 1e-12);
    }

    #[test]
    fn ring_depth_counts_from_boundary() {
        let disk = flat_fan_disk();
        let depth = disk.ring_depth();
        assert_eq!(depth[0], 1);
        for v in 1..7 {
            assert_eq!(depth[v], 0);
        }
    }
}

//! Self-intersection detection and classification. Non-adjacent triangle
//! pairs are intersected by an edge-piercing primitive, segments are
//! chained into curves, and the curve graph is classified into open and
//! closed curves with junction points.
//!
//! Piercing points are computed from the edge's canonical vertex order, so
//! two pairs sharing an edge see bit-identical endpoints and chains close
//! exactly; the tolerance only mops up near-degenerate cases.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::mesh::TriangulatedDisk;

/// Default intersection tolerance as a fraction of the bounding box
/// diagonal.
pub const TOLERANCE_FACTOR: f64 = 1e-8;

pub fn default_tolerance(mesh: &TriangulatedDisk) -> f64 {
    TOLERANCE_FACTOR * mesh.bbox_diagonal()
}

#[derive(Clone, Debug)]
pub struct IntersectionSegment {
    pub tri_a: usize,
    pub tri_b: usize,
    pub a: Point3<f64>,
    pub b: Point3<f64>,
}

#[derive(Clone, Debug)]
pub struct IntersectionCurve {
    /// Chained endpoints; first == last is not repeated for closed curves.
    pub points: Vec<Point3<f64>>,
    /// Indices into the segment list, in walk order.
    pub segments: Vec<usize>,
    pub closed: bool,
}

#[derive(Clone, Debug, Default)]
pub struct StructureFlags {
    /// Tangential touches: pairs meeting in a point rather than a segment.
    pub isolated_points: usize,
    /// Open curve endpoints far from the mesh boundary; a proper
    /// immersion's intersection set never stops mid-surface.
    pub interior_endpoints: usize,
}

impl StructureFlags {
    pub fn clean(&self) -> bool {
        self.isolated_points == 0 && self.interior_endpoints == 0
    }
}

#[derive(Clone, Debug)]
pub struct SelfIntersectionComplex {
    pub segments: Vec<IntersectionSegment>,
    pub curves: Vec<IntersectionCurve>,
    pub junctions: Vec<Point3<f64>>,
    pub flags: StructureFlags,
    pub tol: f64,
}

impl SelfIntersectionComplex {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty() && self.flags.isolated_points == 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pt = |p: &Point3<f64>| serde_json::json!([p.x, p.y, p.z]);
        serde_json::json!({
            "tol": self.tol,
            "curves": self.curves.iter().map(|c| serde_json::json!({
                "closed": c.closed,
                "points": c.points.iter().map(pt).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "junctions": self.junctions.iter().enumerate().map(|(i, p)| {
                serde_json::json!({"index": i, "point": pt(p)})
            }).collect::<Vec<_>>(),
            "segment_count": self.segments.len(),
            "isolated_points": self.flags.isolated_points,
            "interior_endpoints": self.flags.interior_endpoints,
        })
    }
}

/// Where the segment from `p0` to `p1` crosses the plane of (q0, q1, q2)
/// strictly between its endpoints and inside the triangle.
fn pierce(
    p0: Point3<f64>,
    p1: Point3<f64>,
    q0: Point3<f64>,
    q1: Point3<f64>,
    q2: Point3<f64>,
) -> Option<Point3<f64>> {
    let n = (q1 - q0).cross(&(q2 - q0));
    let d0 = (p0 - q0).dot(&n);
    let d1 = (p1 - q0).dot(&n);
    if !(d0 * d1 < 0.0) {
        return None;
    }
    let t = d0 / (d0 - d1);
    let x = p0 + (p1 - p0) * t;
    let inside = |a: Point3<f64>, b: Point3<f64>| (b - a).cross(&(x - a)).dot(&n) >= 0.0;
    if inside(q0, q1) && inside(q1, q2) && inside(q2, q0) {
        Some(x)
    } else {
        None
    }
}

/// Intersection of one non-adjacent triangle pair: a segment, a tangential
/// point touch, or nothing. Each piercing is computed from the canonical
/// (low index, high index) edge direction so results are reproducible
/// across pairs sharing an edge.
fn pair_intersection(
    mesh: &TriangulatedDisk,
    s: usize,
    t: usize,
    tol: f64,
) -> PairResult {
    let ts = mesh.triangles[s];
    let tt = mesh.triangles[t];
    let mut pts: Vec<Point3<f64>> = Vec::with_capacity(4);
    let mut push_edges = |tri: [usize; 3], other: [usize; 3]| {
        let q0 = mesh.vertices[other[0]];
        let q1 = mesh.vertices[other[1]];
        let q2 = mesh.vertices[other[2]];
        for e in 0..3 {
            let a = tri[e].min(tri[(e + 1) % 3]);
            let b = tri[e].max(tri[(e + 1) % 3]);
            if let Some(x) = pierce(mesh.vertices[a], mesh.vertices[b], q0, q1, q2) {
                pts.push(x);
            }
        }
    };
    push_edges(ts, tt);
    push_edges(tt, ts);
    // Merge coincident piercings (a vertex grazing the other plane).
    let mut uniq: Vec<Point3<f64>> = Vec::with_capacity(pts.len());
    for p in pts {
        if !uniq.iter().any(|q| (p - q).norm() <= tol) {
            uniq.push(p);
        }
    }
    match uniq.len() {
        0 => PairResult::None,
        1 => PairResult::Touch(uniq[0]),
        2 => {
            if (uniq[0] - uniq[1]).norm() <= tol {
                PairResult::Touch(uniq[0])
            } else {
                PairResult::Segment(uniq[0], uniq[1])
            }
        }
        _ => {
            // Near-degenerate: keep the farthest-apart pair, scanning in
            // deterministic order.
            let mut best = (0, 1);
            let mut best_d = 0.0;
            for i in 0..uniq.len() {
                for j in i + 1..uniq.len() {
                    let d = (uniq[i] - uniq[j]).norm();
                    if d > best_d {
                        best_d = d;
                        best = (i, j);
                    }
                }
            }
            if best_d <= tol {
                PairResult::Touch(uniq[0])
            } else {
                PairResult::Segment(uniq[best.0], uniq[best.1])
            }
        }
    }
}

enum PairResult {
    None,
    Touch(Point3<f64>),
    Segment(Point3<f64>, Point3<f64>),
}

fn share_vertex(a: [usize; 3], b: [usize; 3]) -> bool {
    a.iter().any(|v| b.contains(v))
}

fn tri_bounds(mesh: &TriangulatedDisk, t: usize) -> (Point3<f64>, Point3<f64>) {
    let [p0, p1, p2] = mesh.tri_points(t);
    let mut lo = p0;
    let mut hi = p0;
    for p in [p1, p2] {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn boxes_overlap(a: &(Point3<f64>, Point3<f64>), b: &(Point3<f64>, Point3<f64>), pad: f64) -> bool {
    (0..3).all(|k| a.0[k] - pad <= b.1[k] && b.0[k] - pad <= a.1[k])
}

/// Candidate pairs from a uniform spatial hash over triangle boxes. Every
/// genuinely intersecting pair shares a cell, so this is a superset of the
/// brute-force candidate set.
fn hashed_candidate_pairs(mesh: &TriangulatedDisk, boxes: &[(Point3<f64>, Point3<f64>)]) -> Vec<(usize, usize)> {
    let nt = mesh.triangles.len();
    let mut mean_ext = 0.0;
    for b in boxes {
        mean_ext += (b.1 - b.0).amax();
    }
    let cell = (2.0 * mean_ext / nt.max(1) as f64).max(1e-12);
    let key = |x: f64| (x / cell).floor() as i64;
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (t, b) in boxes.iter().enumerate() {
        for i in key(b.0.x)..=key(b.1.x) {
            for j in key(b.0.y)..=key(b.1.y) {
                for k in key(b.0.z)..=key(b.1.z) {
                    grid.entry((i, j, k)).or_default().push(t);
                }
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for bucket in grid.values() {
        for i in 0..bucket.len() {
            for j in i + 1..bucket.len() {
                let (a, b) = (bucket[i].min(bucket[j]), bucket[i].max(bucket[j]));
                pairs.push((a, b));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn collect_segments(
    mesh: &TriangulatedDisk,
    pairs: impl Iterator<Item = (usize, usize)>,
    tol: f64,
) -> (Vec<IntersectionSegment>, Vec<Point3<f64>>) {
    let mut segments = Vec::new();
    let mut touches = Vec::new();
    for (s, t) in pairs {
        if share_vertex(mesh.triangles[s], mesh.triangles[t]) {
            continue;
        }
        match pair_intersection(mesh, s, t, tol) {
            PairResult::None => {}
            PairResult::Touch(p) => touches.push(p),
            PairResult::Segment(a, b) => segments.push(IntersectionSegment {
                tri_a: s,
                tri_b: t,
                a,
                b,
            }),
        }
    }
    (segments, touches)
}

/// All self-intersections of the mesh, spatial-hash accelerated.
pub fn self_intersections(mesh: &TriangulatedDisk, tol: f64) -> SelfIntersectionComplex {
    let boxes: Vec<_> = (0..mesh.triangles.len())
        .map(|t| tri_bounds(mesh, t))
        .collect();
    let pairs = hashed_candidate_pairs(mesh, &boxes);
    let filtered = pairs
        .into_iter()
        .filter(|&(s, t)| boxes_overlap(&boxes[s], &boxes[t], tol));
    let (segments, touches) = collect_segments(mesh, filtered, tol);
    build_complex(mesh, segments, touches, tol)
}

/// Same result by testing every non-adjacent pair; the reference the
/// accelerated path is checked against.
pub fn self_intersections_brute(mesh: &TriangulatedDisk, tol: f64) -> SelfIntersectionComplex {
    let nt = mesh.triangles.len();
    let pairs = (0..nt).flat_map(|s| (s + 1..nt).map(move |t| (s, t)));
    let (segments, touches) = collect_segments(mesh, pairs, tol);
    build_complex(mesh, segments, touches, tol)
}

pub fn is_embedded(mesh: &TriangulatedDisk, tol: f64) -> bool {
    self_intersections(mesh, tol).is_empty()
}

/// Chain segments into curves by clustering endpoints (4 x tol), walking
/// degree-2 nodes, and reporting junctions and structure anomalies. Point
/// touches count as isolated only when they sit away from every curve;
/// tangential grazing on a transversal curve is a redundant detection, not
/// a structure defect.
fn build_complex(
    mesh: &TriangulatedDisk,
    segments: Vec<IntersectionSegment>,
    touches: Vec<Point3<f64>>,
    tol: f64,
) -> SelfIntersectionComplex {
    let chain_tol = 4.0 * tol;
    let mut flags = StructureFlags {
        isolated_points: 0,
        interior_endpoints: 0,
    };
    if segments.is_empty() {
        flags.isolated_points = touches.len();
        return SelfIntersectionComplex {
            segments,
            curves: Vec::new(),
            junctions: Vec::new(),
            flags,
            tol,
        };
    }

    // Distinct endpoint representatives, bitwise, then transitive merge of
    // representatives within the chaining tolerance.
    let ord = |p: &Point3<f64>, q: &Point3<f64>| {
        p.x.total_cmp(&q.x)
            .then(p.y.total_cmp(&q.y))
            .then(p.z.total_cmp(&q.z))
    };
    let mut reps: Vec<Point3<f64>> = Vec::with_capacity(segments.len() * 2);
    for s in &segments {
        reps.push(s.a);
        reps.push(s.b);
    }
    reps.sort_by(|p, q| ord(p, q));
    reps.dedup_by(|p, q| p == q);
    let mut root: Vec<usize> = (0..reps.len()).collect();
    fn find(root: &mut Vec<usize>, mut i: usize) -> usize {
        while root[i] != i {
            root[i] = root[root[i]];
            i = root[i];
        }
        i
    }
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if reps[j].x - reps[i].x > chain_tol {
                break;
            }
            if (reps[i] - reps[j]).norm() <= chain_tol {
                let (a, b) = (find(&mut root, i), find(&mut root, j));
                let (lo, hi) = (a.min(b), a.max(b));
                root[hi] = lo;
            }
        }
    }
    // Node ids in first-appearance order of their root representative.
    let mut node_of_rep: Vec<usize> = vec![usize::MAX; reps.len()];
    let mut node_pos: Vec<Point3<f64>> = Vec::new();
    for i in 0..reps.len() {
        let r = find(&mut root, i);
        if node_of_rep[r] == usize::MAX {
            node_of_rep[r] = node_pos.len();
            node_pos.push(reps[r]);
        }
        node_of_rep[i] = node_of_rep[r];
    }
    let node_of_point = |p: &Point3<f64>| {
        let i = reps.binary_search_by(|q| ord(q, p)).expect("endpoint indexed");
        node_of_rep[i]
    };

    let seg_nodes: Vec<(usize, usize)> = segments
        .iter()
        .map(|s| (node_of_point(&s.a), node_of_point(&s.b)))
        .collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); node_pos.len()];
    for (k, &(a, b)) in seg_nodes.iter().enumerate() {
        incident[a].push(k);
        if b != a {
            incident[b].push(k);
        }
    }
    let degree: Vec<usize> = incident.iter().map(|v| v.len()).collect();

    // Walk chains: start at every non-degree-2 node, then sweep leftover
    // cycles of degree-2 nodes.
    let mut used = vec![false; segments.len()];
    let mut curves = Vec::new();
    let walk = |start_node: usize,
                first_seg: usize,
                used: &mut Vec<bool>|
     -> IntersectionCurve {
        let mut pts = vec![node_pos[start_node]];
        let mut segs = Vec::new();
        let mut node = start_node;
        let mut seg = first_seg;
        loop {
            used[seg] = true;
            segs.push(seg);
            let (a, b) = seg_nodes[seg];
            node = if a == node { b } else { a };
            pts.push(node_pos[node]);
            if degree[node] != 2 || node == start_node {
                break;
            }
            match incident[node].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        let closed = node == start_node && pts.len() > 1;
        if closed {
            pts.pop();
        }
        IntersectionCurve {
            points: pts,
            segments: segs,
            closed,
        }
    };
    for node in 0..node_pos.len() {
        if degree[node] == 2 {
            continue;
        }
        loop {
            let next = incident[node].iter().find(|&&s| !used[s]).copied();
            match next {
                Some(s) => curves.push(walk(node, s, &mut used)),
                None => break,
            }
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            let start = seg_nodes[k].0;
            curves.push(walk(start, k, &mut used));
        }
    }

    let junctions: Vec<Point3<f64>> = (0..node_pos.len())
        .filter(|&n| degree[n] >= 3)
        .map(|n| node_pos[n])
        .collect();

    // Open curve ends should sit on the mesh boundary.
    let boundary_edges: Vec<(Point3<f64>, Point3<f64>)> = mesh
        .edge_uses()
        .iter()
        .filter(|(_, uses)| uses.len() == 1)
        .map(|(&(a, b), _)| (mesh.vertices[a], mesh.vertices[b]))
        .collect();
    let dist_to_boundary = |p: &Point3<f64>| {
        let mut best = f64::INFINITY;
        for (a, b) in &boundary_edges {
            let ab: Vector3<f64> = b - a;
            let len2 = ab.norm_squared();
            let t = if len2 > 0.0 {
                ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min((p - (a + ab * t)).norm());
        }
        best
    };
    for curve in &curves {
        if curve.closed {
            continue;
        }
        for end in [curve.points.first(), curve.points.last()] {
            let p = end.expect("curve has points");
            let node_degree_one = {
                // Only degree-1 stops count; a junction end is structure.
                let d = dist_to_boundary(p);
                d > 10.0 * tol
            };
            if node_degree_one {
                // Junction endpoints are legitimate interior stops.
                let at_junction = junctions.iter().any(|j| (j - p).norm() <= chain_tol);
                if !at_junction {
                    flags.interior_endpoints += 1;
                }
            }
        }
    }

    flags.isolated_points = touches
        .iter()
        .filter(|p| node_pos.iter().all(|n| (*p - n).norm() > chain_tol))
        .count();

    SelfIntersectionComplex {
        segments,
        curves,
        junctions,
        flags,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use crate::meshing::{planar_disk, sphere_cap};

    fn grid_sheet(
        origin: Point3<f64>,
        du: Vector3<f64>,
        dv: Vector3<f64>,
        n: usize,
    ) -> (Vec<Point3<f64>>, Vec<[usize; 3]>) {
        let mut vertices = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                vertices.push(origin + du * (i as f64 / n as f64) + dv * (j as f64 / n as f64));
            }
        }
        let id = |i: usize, j: usize| i * (n + 1) + j;
        let mut triangles = Vec::new();
        for i in 0..n {
            for j in 0..n {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        (vertices, triangles)
    }

    fn soup(parts: Vec<(Vec<Point3<f64>>, Vec<[usize; 3]>)>) -> TriangulatedDisk {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (vs, ts) in parts {
            let off = vertices.len();
            vertices.extend(vs);
            triangles.extend(ts.into_iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        }
        TriangulatedDisk::new(vertices, triangles, vec![])
    }

    #[test]
    fn flat_disk_is_embedded() {
        let disk = planar_disk(1.0, 48, 6);
        let tol = default_tolerance(&disk);
        let complex = self_intersections(&disk, tol);
        assert!(complex.is_empty());
        assert!(is_embedded(&disk, tol));
    }

    #[test]
    fn single_triangle_is_embedded() {
        let mesh = TriangulatedDisk::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
            vec![0, 1, 2],
        );
        assert!(is_embedded(&mesh, 1e-9));
    }

    #[test]
    fn crossing_sheets_chain_into_one_open_curve() {
        let n = 8;
        // Horizontal sheet and a tilted sheet crossing it along a line.
        let a = grid_sheet(
            Point3::new(-1.0, -1.0, 0.0),
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(0.0, 2.0, 0.0),
            n,
        );
        let b = grid_sheet(
            Point3::new(-0.8, -1.1, -0.503),
            Vector3::new(1.6, 0.0, 1.013),
            Vector3::new(0.0, 2.2, 0.0),
            n,
        );
        let mesh = soup(vec![a, b]);
        let tol = default_tolerance(&mesh);
        let complex = self_intersections(&mesh, tol);
        assert!(!complex.segments.is_empty());
        assert_eq!(complex.curves.len(), 1, "{:?}", complex.curves.len());
        assert!(!complex.curves[0].closed);
        assert!(complex.junctions.is_empty());
        assert!(complex.flags.clean(), "{:?}", complex.flags);
        // The chained polyline lies on the known crossing line z = 0.
        for p in &complex.curves[0].points {
            assert!(p.z.abs() < 1e-9);
        }
    }

    #[test]
    fn hash_and_brute_force_agree_exactly() {
        let n = 7;
        let a = grid_sheet(
            Point3::new(-1.0, -1.0, 0.0),
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(0.0, 2.0, 0.0),
            n,
        );
        let b = grid_sheet(
            Point3::new(-0.9, -1.0, -0.6),
            Vector3::new(1.8, 0.1, 1.2),
            Vector3::new(0.05, 2.0, 0.0),
            n,
        );
        let mesh = soup(vec![a, b]);
        let tol = default_tolerance(&mesh);
        let fast = self_intersections(&mesh, tol);
        let slow = self_intersections_brute(&mesh, tol);
        let key = |s: &IntersectionSegment| (s.tri_a, s.tri_b);
        let mut fk: Vec<_> = fast.segments.iter().map(key).collect();
        let mut sk: Vec<_> = slow.segments.iter().map(key).collect();
        fk.sort_unstable();
        sk.sort_unstable();
        assert_eq!(fk, sk);
        // Endpoints must agree bitwise, same primitive on both paths.
        let by_key = |c: &SelfIntersectionComplex| {
            let mut v: Vec<_> = c
                .segments
                .iter()
                .map(|s| (s.tri_a, s.tri_b, s.a, s.b))
                .collect();
            v.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
            v
        };
        assert_eq!(by_key(&fast), by_key(&slow));
    }

    #[test]
    fn sphere_through_sheet_yields_closed_curve() {
        let sheet = grid_sheet(
            Point3::new(-1.5, -1.5, 0.0),
            Vector3::new(3.0, 0.0, 0.0),
            Vector3::new(0.0, 3.0, 0.0),
            10,
        );
        let theta = 2.8f64;
        let rim: Vec<Point3<f64>> = (0..48)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 48.0;
                Point3::new(
                    theta.sin() * a.cos(),
                    theta.sin() * a.sin(),
                    0.9 + theta.cos(),
                )
            })
            .collect();
        let cap = sphere_cap(Point3::new(0.0, 0.0, 0.9), 1.0, Vector3::z(), theta, &rim, 24)
            .unwrap();
        let mesh = soup(vec![sheet, (cap.vertices, cap.triangles)]);
        let tol = default_tolerance(&mesh);
        let complex = self_intersections(&mesh, tol);
        assert_eq!(
            complex.curves.len(),
            1,
            "curves: {:?} (segments {}, flags {:?})",
            complex
                .curves
                .iter()
                .map(|c| (c.segments.len(), c.closed))
                .collect::<Vec<_>>(),
            complex.segments.len(),
            complex.flags,
        );
        assert!(complex.curves[0].closed);
        assert!(complex.flags.clean());
        // The crossing circle has radius sin(acos(-0.9)).
        let r = (1.0f64 - 0.81).sqrt();
        for p in &complex.curves[0].points {
            assert!(p.z.abs() < 1e-9);
            let got = (p.x * p.x + p.y * p.y).sqrt();
            assert!((got - r).abs() < 0.01, "radius {got} vs {r}");
        }
    }

    #[test]
    fn far_apart_duplicates_do_not_intersect() {
        let disk = planar_disk(1.0, 24, 4);
        let copy = disk.translated(Vector3::new(0.0, 0.0, 1e-6));
        let mesh = soup(vec![
            (disk.vertices, disk.triangles),
            (copy.vertices, copy.triangles),
        ]);
        // tol default is ~1e-8 x diag, offset is 10x bigger than that scale.
        let tol = default_tolerance(&mesh);
        assert!(tol * 10.0 < 1e-6);
        let complex = self_intersections(&mesh, tol);
        assert!(complex.is_empty());
    }

    fn synthetic_segment(a: Point3<f64>, b: Point3<f64>) -> IntersectionSegment {
        IntersectionSegment {
            tri_a: 0,
            tri_b: 1,
            a,
            b,
        }
    }

    #[test]
    fn midair_curve_end_is_flagged_as_structure_violation() {
        // Real piercings always stop on a boundary edge, so feed the
        // chaining stage a hand-made polyline fizzling out mid-surface.
        let host = planar_disk(1.0, 24, 4);
        let segs = vec![
            synthetic_segment(Point3::new(-0.2, 0.0, 0.0), Point3::new(0.0, 0.0, 0.0)),
            synthetic_segment(Point3::new(0.0, 0.0, 0.0), Point3::new(0.2, 0.05, 0.0)),
        ];
        let complex = build_complex(&host, segs, vec![], 1e-9);
        assert_eq!(complex.curves.len(), 1);
        assert!(!complex.curves[0].closed);
        assert_eq!(complex.flags.interior_endpoints, 2);
    }

    #[test]
    fn junction_node_splits_curves_and_is_reported() {
        let host = planar_disk(1.0, 24, 4);
        let hub = Point3::new(0.0, 0.0, 0.0);
        // Three arms meeting at the hub, each reaching a rim vertex so the
        // far endpoints are not interior violations.
        let s3h = 3.0f64.sqrt() / 2.0;
        let segs = vec![
            synthetic_segment(hub, Point3::new(1.0, 0.0, 0.0)),
            synthetic_segment(hub, Point3::new(-0.5, s3h, 0.0)),
            synthetic_segment(hub, Point3::new(-0.5, -s3h, 0.0)),
        ];
        let complex = build_complex(&host, segs, vec![], 1e-9);
        assert_eq!(complex.junctions.len(), 1);
        assert_eq!(complex.curves.len(), 3);
        for c in &complex.curves {
            assert!(!c.closed);
        }
        assert_eq!(complex.flags.interior_endpoints, 0, "{:?}", complex.flags);
    }
}

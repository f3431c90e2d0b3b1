//! Disk-swap surgery and fold smoothing.
//!
//! When the image of a disk crosses itself along a closed curve, the two
//! preimage loops bound subdisks whose images coincide. Exchanging the
//! patches rewires the parameterization without touching the image point
//! set, so area and enclosed volume survive the swap; what it buys is that
//! the crossing becomes a crease, and a crease can be relaxed. smooth_fold
//! performs that relaxation and certifies a strict energy decrease.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::{Point2, Point3, Vector3};

use crate::energy::{breakdown, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::intersect::default_tolerance;
use crate::mesh::TriangulatedDisk;
use crate::metric::MetricField;
use crate::refmap::{tutte_reference, ReferenceMap};
use crate::region::{cone_flux, surface_area, EnclosureRegion};

/// A seam edge counts as smoothed out once its interior dihedral angle
/// opens past this value (flat is pi).
pub const FOLD_OPEN_ANGLE: f64 = std::f64::consts::PI - 0.1;

/// The subdisk a closed vertex loop bounds, taken on the loop's left: the
/// side whose triangles traverse the loop edges in loop order.
struct Patch {
    triangles: Vec<usize>,
    interior: Vec<usize>,
}

fn subdisk(mesh: &TriangulatedDisk, gamma: &[usize]) -> Result<Patch> {
    let l = gamma.len();
    if l < 3 {
        return Err(Error::Invalid(
            "subdisk loop needs at least 3 vertices".into(),
        ));
    }
    let mut seen = HashSet::new();
    for &v in gamma {
        if v >= mesh.vertices.len() {
            return Err(Error::Invalid(format!("loop vertex {v} out of range")));
        }
        if !seen.insert(v) {
            return Err(Error::Invalid(format!("loop repeats vertex {v}")));
        }
    }

    let edges = mesh.edge_uses();
    let mut loop_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut left = Vec::with_capacity(l);
    let mut right = Vec::with_capacity(l);
    for k in 0..l {
        let a = gamma[k];
        let b = gamma[(k + 1) % l];
        let key = (a.min(b), a.max(b));
        let uses = edges
            .get(&key)
            .ok_or_else(|| Error::Invalid(format!("loop step {a} -> {b} is not a mesh edge")))?;
        loop_edges.insert(key);
        let fwd = a < b;
        let lt = uses.iter().find(|&&(_, d)| d == fwd).map(|&(t, _)| t);
        left.push(lt.ok_or_else(|| {
            Error::Invalid(format!("no triangle on the left of loop step {a} -> {b}"))
        })?);
        right.push(uses.iter().find(|&&(_, d)| d != fwd).map(|&(t, _)| t));
    }

    // Flood across every interior edge that is not part of the loop.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); mesh.triangles.len()];
    for (key, uses) in &edges {
        if uses.len() == 2 && !loop_edges.contains(key) {
            adjacency[uses[0].0].push(uses[1].0);
            adjacency[uses[1].0].push(uses[0].0);
        }
    }
    let mut inside = vec![false; mesh.triangles.len()];
    let mut queue = VecDeque::new();
    inside[left[0]] = true;
    queue.push_back(left[0]);
    while let Some(t) = queue.pop_front() {
        for &s in &adjacency[t] {
            if !inside[s] {
                inside[s] = true;
                queue.push_back(s);
            }
        }
    }
    if left.iter().any(|&t| !inside[t]) || right.iter().flatten().any(|&t| inside[t]) {
        return Err(Error::Invalid(
            "loop does not separate the disk into two sides".into(),
        ));
    }

    let triangles: Vec<usize> = (0..mesh.triangles.len()).filter(|&t| inside[t]).collect();
    let mut verts: HashSet<usize> = HashSet::new();
    let mut patch_edges: HashSet<(usize, usize)> = HashSet::new();
    for &t in &triangles {
        let tri = mesh.triangles[t];
        for k in 0..3 {
            verts.insert(tri[k]);
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            patch_edges.insert((a.min(b), a.max(b)));
        }
    }
    let chi = verts.len() as i64 - patch_edges.len() as i64 + triangles.len() as i64;
    if chi != 1 {
        return Err(Error::Invalid(format!(
            "loop bounds a region with euler characteristic {chi}, not a disk"
        )));
    }

    let on_boundary = mesh.is_boundary_vertex();
    let loop_set: HashSet<usize> = gamma.iter().copied().collect();
    let mut interior: Vec<usize> = verts.into_iter().filter(|v| !loop_set.contains(v)).collect();
    interior.sort_unstable();
    if let Some(&v) = interior.iter().find(|&&v| on_boundary[v]) {
        return Err(Error::Invalid(format!(
            "subdisk interior vertex {v} lies on the disk boundary"
        )));
    }
    Ok(Patch {
        triangles,
        interior,
    })
}

/// Cyclic image alignment of the two loops: the rotation r for which
/// gamma_minus[(k + r) % l] lands on gamma_plus[k] for every k. Only
/// direction-preserving alignments are accepted; a reversed match would
/// glue the transplanted patch inside out and flip its volume
/// contribution.
fn match_rotation(u: &ReferenceMap, gp: &[usize], gm: &[usize], tol: f64) -> Result<usize> {
    let l = gp.len();
    if gm.len() != l {
        return Err(Error::Invalid(format!(
            "loops have {} and {} vertices; the swap pairs them one to one",
            l,
            gm.len()
        )));
    }
    let mut best = (f64::INFINITY, 0usize);
    for r in 0..l {
        let mut gap = 0.0f64;
        for k in 0..l {
            let d = (u.image.vertices[gp[k]] - u.image.vertices[gm[(k + r) % l]]).norm();
            gap = gap.max(d);
        }
        if gap < best.0 {
            best = (gap, r);
        }
    }
    if best.0 <= tol {
        Ok(best.1)
    } else {
        Err(Error::LoopMismatch { tol, gap: best.0 })
    }
}

fn shoelace2(poly: &[Point2<f64>]) -> f64 {
    let mut acc = 0.0;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        acc += a.x * b.y - a.y * b.x;
    }
    acc
}

/// Flat-embed the interior reference vertices of a transplanted patch
/// inside the reference polygon of its new rim.
fn reembed_interior(
    reference: &mut [Point2<f64>],
    image: &TriangulatedDisk,
    rim: &[usize],
    interior: &[usize],
    patch_triangles: &[[usize; 3]],
) -> Result<()> {
    let mut local: HashMap<usize, usize> = HashMap::new();
    for (i, &v) in rim.iter().chain(interior.iter()).enumerate() {
        local.insert(v, i);
    }
    let verts: Vec<Point3<f64>> = rim
        .iter()
        .chain(interior.iter())
        .map(|&v| image.vertices[v])
        .collect();
    let tris: Vec<[usize; 3]> = patch_triangles
        .iter()
        .map(|t| [local[&t[0]], local[&t[1]], local[&t[2]]])
        .collect();
    let patch = TriangulatedDisk::new(verts, tris, (0..rim.len()).collect());
    let pinned: Vec<Point2<f64>> = rim.iter().map(|&v| reference[v]).collect();
    let flat = tutte_reference(&patch, &pinned, 1e-12)?;
    // Every re-embedded triangle must agree with the rim polygon's
    // orientation, or the new reference is not an embedding.
    let rim_sign = shoelace2(&pinned);
    for t in &patch.triangles {
        let (a, b, c) = (flat[t[0]], flat[t[1]], flat[t[2]]);
        let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if det * rim_sign <= 0.0 {
            return Err(Error::Invalid(
                "transplanted patch folds over in the reference disk".into(),
            ));
        }
    }
    for (i, &v) in interior.iter().enumerate() {
        reference[v] = flat[rim.len() + i];
    }
    Ok(())
}

/// Exchange the two subdisks bounded by the given reference loops. The
/// loops must bound vertex-disjoint subdisks (each taken on its loop's
/// left) whose image polygons coincide up to a cyclic shift within the
/// mesh-scale tolerance. Vertices keep their image positions; only the
/// patch triangles are rewired onto the opposite rim, so the image point
/// set, the area, and the enclosed volume all survive. Interior reference
/// coordinates of each patch are re-embedded in the hole they now fill.
pub fn surgery_swap(
    u: &ReferenceMap,
    gamma_plus: &[usize],
    gamma_minus: &[usize],
) -> Result<ReferenceMap> {
    u.image.ensure_disk()?;
    let plus = subdisk(&u.image, gamma_plus)?;
    let minus = subdisk(&u.image, gamma_minus)?;

    // A shared vertex would weld the transplants together.
    let mut plus_verts: HashSet<usize> = gamma_plus.iter().copied().collect();
    plus_verts.extend(plus.interior.iter().copied());
    if gamma_minus.iter().any(|v| plus_verts.contains(v))
        || minus.interior.iter().any(|v| plus_verts.contains(v))
    {
        return Err(Error::Invalid("subdisks are not disjoint".into()));
    }

    let l = gamma_plus.len();
    let tol = default_tolerance(&u.image);
    let rot = match_rotation(u, gamma_plus, gamma_minus, tol)?;

    let mut rim_swap: HashMap<usize, usize> = HashMap::new();
    for k in 0..l {
        rim_swap.insert(gamma_minus[(k + rot) % l], gamma_plus[k]);
        rim_swap.insert(gamma_plus[k], gamma_minus[(k + rot) % l]);
    }
    let remap = |v: usize| *rim_swap.get(&v).unwrap_or(&v);

    let plus_set: HashSet<usize> = plus.triangles.iter().copied().collect();
    let minus_set: HashSet<usize> = minus.triangles.iter().copied().collect();
    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(u.image.triangles.len());
    for (t, tri) in u.image.triangles.iter().enumerate() {
        if !plus_set.contains(&t) && !minus_set.contains(&t) {
            triangles.push(*tri);
        }
    }
    let host_len = triangles.len();
    for &t in &minus.triangles {
        let tri = u.image.triangles[t];
        triangles.push([remap(tri[0]), remap(tri[1]), remap(tri[2])]);
    }
    let minus_len = triangles.len() - host_len;
    for &t in &plus.triangles {
        let tri = u.image.triangles[t];
        triangles.push([remap(tri[0]), remap(tri[1]), remap(tri[2])]);
    }

    let image = TriangulatedDisk::new(
        u.image.vertices.clone(),
        triangles,
        u.image.boundary_loop.clone(),
    );
    image.ensure_disk()?;

    let mut reference = u.reference.clone();
    reembed_interior(
        &mut reference,
        &image,
        gamma_plus,
        &minus.interior,
        &image.triangles[host_len..host_len + minus_len],
    )?;
    reembed_interior(
        &mut reference,
        &image,
        gamma_minus,
        &plus.interior,
        &image.triangles[host_len + minus_len..],
    )?;
    ReferenceMap::new(reference, image)
}

fn dihedral_between(mesh: &TriangulatedDisk, t1: usize, t2: usize) -> f64 {
    let n1 = mesh.tri_cross(t1);
    let n2 = mesh.tri_cross(t2);
    let denom = n1.norm() * n2.norm();
    if !(denom > 0.0) || !denom.is_finite() {
        return std::f64::consts::PI;
    }
    let bend = n1.cross(&n2).norm().atan2(n1.dot(&n2));
    std::f64::consts::PI - bend
}

/// Interior dihedral angle across the edge (a, b): pi when the two faces
/// are coplanar, approaching zero as the surface folds back on itself.
/// None for boundary or non-manifold edges.
pub fn edge_dihedral(mesh: &TriangulatedDisk, a: usize, b: usize) -> Option<f64> {
    let edges = mesh.edge_uses();
    let uses = edges.get(&(a.min(b), a.max(b)))?;
    if uses.len() != 2 {
        return None;
    }
    Some(dihedral_between(mesh, uses[0].0, uses[1].0))
}

/// Interior manifold edges whose dihedral angle falls below `threshold`,
/// as ascending vertex pairs.
pub fn fold_edges(mesh: &TriangulatedDisk, threshold: f64) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = mesh
        .edge_uses()
        .iter()
        .filter(|(_, uses)| uses.len() == 2)
        .filter(|(_, uses)| dihedral_between(mesh, uses[0].0, uses[1].0) < threshold)
        .map(|(&key, _)| key)
        .collect();
    out.sort_unstable();
    out
}

#[derive(Clone, Copy, Debug)]
pub struct FoldSmoothing {
    pub max_iterations: usize,
    /// Scale on the Laplacian displacement before backtracking.
    pub damping: f64,
    /// Success requires the energy to drop by at least this fraction of
    /// (1 + |initial energy|).
    pub min_decrease: f64,
    /// The seam counts as smooth once every fold edge opens past this.
    pub open_angle: f64,
}

impl Default for FoldSmoothing {
    fn default() -> Self {
        FoldSmoothing {
            max_iterations: 400,
            damping: 0.5,
            min_decrease: 1e-9,
            open_angle: FOLD_OPEN_ANGLE,
        }
    }
}

/// Relax a two-ring collar around a crease until the seam opens up,
/// accepting only moves that lower area + 2 h volume. Returns the smoothed
/// map and its energies; fails with `FoldNotSmoothable` when no decrease
/// of at least the configured minimum is achievable, which is the signal
/// for a false fold detection.
pub fn smooth_fold(
    u: &ReferenceMap,
    fold: &[usize],
    region: &EnclosureRegion,
    h: f64,
) -> Result<(ReferenceMap, EnergyBreakdown)> {
    smooth_fold_with(u, fold, region, h, &FoldSmoothing::default())
}

pub fn smooth_fold_with(
    u: &ReferenceMap,
    fold: &[usize],
    region: &EnclosureRegion,
    h: f64,
    opts: &FoldSmoothing,
) -> Result<(ReferenceMap, EnergyBreakdown)> {
    let initial = breakdown(u, region, &MetricField::Euclidean, h)?;
    if fold.len() < 2 {
        return Err(Error::Invalid(
            "fold polyline needs at least 2 vertices".into(),
        ));
    }

    // Seam edges between consecutive fold vertices; the wrap-around pair
    // participates only if it happens to be a mesh edge, so open chains
    // and closed loops share one calling convention.
    let edges = u.image.edge_uses();
    let mut seam_pairs: Vec<(usize, usize)> = Vec::new();
    for k in 0..fold.len() {
        let a = fold[k];
        let b = fold[(k + 1) % fold.len()];
        let closing = k + 1 == fold.len();
        let key = (a.min(b), a.max(b));
        match edges.get(&key) {
            Some(uses) if uses.len() == 2 => seam_pairs.push((uses[0].0, uses[1].0)),
            Some(_) => {}
            None if closing => {}
            None => {
                return Err(Error::Invalid(format!(
                    "fold vertices {a} and {b} are not adjacent in the mesh"
                )));
            }
        }
    }
    seam_pairs.sort_unstable();
    seam_pairs.dedup();
    if seam_pairs.is_empty() {
        return Err(Error::Invalid(
            "fold polyline crosses no interior edges".into(),
        ));
    }

    // Movable collar: within two edge rings of the fold, boundary pinned.
    let adjacency = u.image.vertex_adjacency();
    let on_boundary = u.image.is_boundary_vertex();
    let mut depth: Vec<usize> = vec![usize::MAX; u.image.vertices.len()];
    let mut queue = VecDeque::new();
    for &v in fold {
        if depth[v] != 0 {
            depth[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        if depth[v] == 2 {
            continue;
        }
        for &w in &adjacency[v] {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let movable: Vec<usize> = (0..u.image.vertices.len())
        .filter(|&v| depth[v] <= 2 && !on_boundary[v])
        .collect();

    let mut disk = region.disk.clone();
    let cap_flux = cone_flux(&region.cap.vertices, &region.cap.triangles);
    let eval = |d: &TriangulatedDisk| {
        surface_area(d, &MetricField::Euclidean)
            + 2.0 * h * (cone_flux(&d.vertices, &d.triangles) + cap_flux) / 3.0
    };
    let mut current = eval(&disk);

    for _ in 0..opts.max_iterations {
        let worst = seam_pairs
            .iter()
            .map(|&(s, t)| dihedral_between(&disk, s, t))
            .fold(f64::INFINITY, f64::min);
        if worst > opts.open_angle {
            break;
        }

        let mut step: Vec<Vector3<f64>> = Vec::with_capacity(movable.len());
        for &v in &movable {
            let mut c = Vector3::zeros();
            for &w in &adjacency[v] {
                c += disk.vertices[w].coords;
            }
            let target = c / adjacency[v].len() as f64;
            step.push((target - disk.vertices[v].coords) * opts.damping);
        }

        let saved: Vec<Point3<f64>> = movable.iter().map(|&v| disk.vertices[v]).collect();
        let mut t = 1.0f64;
        let mut accepted = false;
        for _ in 0..30 {
            for (i, &v) in movable.iter().enumerate() {
                disk.vertices[v] = saved[i] + step[i] * t;
            }
            let cand = eval(&disk);
            if cand.is_finite() && cand < current {
                current = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            for (i, &v) in movable.iter().enumerate() {
                disk.vertices[v] = saved[i];
            }
            break;
        }
    }

    let map = ReferenceMap::new(u.reference.clone(), disk.clone())?;
    let smoothed_region = EnclosureRegion {
        disk,
        cap: region.cap.clone(),
    };
    let out = breakdown(&map, &smoothed_region, &MetricField::Euclidean, h)?;
    if initial.i_h - out.i_h < opts.min_decrease * (1.0 + initial.i_h.abs()) {
        return Err(Error::FoldNotSmoothable);
    }
    Ok((map, out))
}

//! Descent solver for the capillary disk energy: area plus 2H times the
//! volume enclosed against the boundary cap, minimized over interior vertex
//! positions with the rim pinned to the curve samples.
//!
//! The gradient is exact for the evaluated piecewise-linear functional: the
//! area term differentiates to the cotangent mean-curvature vector scaled
//! by mixed area, the volume term to one sixth of the incident cone cross
//! products. Stationarity is therefore discrete constant mean curvature H.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::curvature::{h_concavity_check, mean_curvature};
use crate::domain::AmbientDomain;
use crate::energy::{breakdown, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::intersect::{default_tolerance, is_embedded};
use crate::mesh::{TriangulatedDisk, DEGENERATE_AREA_FACTOR};
use crate::meshing::flipped;
use crate::metric::MetricField;
use crate::numeric::NeumaierSum;
use crate::refmap::disk_reference_map;
use crate::region::{BoundaryCurve, EnclosureRegion, Side};

/// Fraction of the domain scale by which the sweep initialization offsets
/// cap vertices into the interior.
pub const SWEEP_OFFSET_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Step budget per refinement level.
    pub max_iterations: usize,
    /// Convergence threshold on the mean-curvature defect, units 1/length.
    pub residual_tol: f64,
    /// Armijo sufficient-decrease slope factor.
    pub armijo_slope: f64,
    /// Growth applied to the trial step after a full-step acceptance.
    pub step_growth: f64,
    /// Step halvings before the line search gives up.
    pub max_halvings: u32,
    /// Uniform refinement passes after converging at the coarse level.
    pub refinement_levels: usize,
    pub side: Side,
    /// Recorded for report provenance; the descent itself is deterministic.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 2000,
            residual_tol: 0.05,
            armijo_slope: 1e-4,
            step_growth: 1.5,
            max_halvings: 30,
            refinement_levels: 0,
            side: Side::Minus,
            seed: 0,
        }
    }
}

/// Outcome of one minimization. `residual` is the 95th percentile of the
/// per-vertex defect, so `converged` means at least 95% of interior
/// vertices meet `residual_tol`. `violations` counts h-concavity failures
/// more than two rings away from the pinned boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub i_h_trace: Vec<f64>,
    pub embedded: bool,
    pub violations: usize,
    pub energies: EnergyBreakdown,
}

/// Diagnostics for the two-sided solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairReport {
    /// Symmetric vertex Hausdorff distance between the two disks.
    pub hausdorff: f64,
    /// Mean of the mean-curvature vector dotted with the curve's polygon
    /// area normal; the two sides bulge apart, so the signs oppose.
    pub alignment_minus: f64,
    pub alignment_plus: f64,
    /// Whether radial projection maps each disk one-to-one onto the
    /// boundary sphere (transversality with consistent sign).
    pub graph_minus: bool,
    pub graph_plus: bool,
    pub report_minus: SolveReport,
    pub report_plus: SolveReport,
}

fn inward_direction(domain: &AmbientDomain, p: &Point3<f64>) -> Vector3<f64> {
    match domain {
        AmbientDomain::Ball { .. } => {
            let n = p.coords.norm();
            if n == 0.0 {
                Vector3::zeros()
            } else {
                -p.coords / n
            }
        }
        AmbientDomain::ModifiedCylinder { .. } => {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            if r == 0.0 {
                Vector3::zeros()
            } else {
                Vector3::new(-p.x / r, -p.y / r, 0.0)
            }
        }
    }
}

/// Initial spanning disk for one side: the boundary cap copied and pushed
/// into the interior, with the offset ramped up over the first three vertex
/// rings so the rim stays exactly on the curve samples.
pub fn initialize_sweep(
    boundary: &BoundaryCurve,
    domain: &AmbientDomain,
    side: Side,
) -> Result<TriangulatedDisk> {
    boundary.validate()?;
    if *domain != boundary.domain {
        return Err(Error::Invalid(
            "boundary curve was sampled for a different domain".into(),
        ));
    }
    let mut disk = boundary.cap(side).clone();
    let depth = disk.ring_depth();
    let scale = domain.scale();
    for (v, p) in disk.vertices.iter_mut().enumerate() {
        if depth[v] == 0 {
            continue;
        }
        let ramp = (depth[v].min(3) as f64) / 3.0;
        let dir = inward_direction(domain, p);
        *p += dir * (SWEEP_OFFSET_FRACTION * scale * ramp);
    }
    disk.ensure_disk()?;
    Ok(disk)
}

/// One pass over the disk: exact area, origin cone flux, and the smallest
/// triangle area (for degeneracy guards).
fn area_flux_min(disk: &TriangulatedDisk) -> (f64, f64, f64) {
    let mut area = NeumaierSum::new();
    let mut flux = NeumaierSum::new();
    let mut min_area = f64::INFINITY;
    for tri in &disk.triangles {
        let a = disk.vertices[tri[0]].coords;
        let b = disk.vertices[tri[1]].coords;
        let c = disk.vertices[tri[2]].coords;
        let t = 0.5 * (b - a).cross(&(c - a)).norm();
        area.add(t);
        flux.add(0.5 * a.dot(&b.cross(&c)));
        if t < min_area {
            min_area = t;
        }
    }
    (area.value(), flux.value(), min_area)
}

/// Exact gradient of area + 2H * (cone flux)/3 at every vertex.
fn ih_gradient(disk: &TriangulatedDisk, h: f64) -> Vec<Vector3<f64>> {
    let mut grad = vec![Vector3::zeros(); disk.vertices.len()];
    let vol_w = h / 3.0;
    for tri in &disk.triangles {
        let [ia, ib, ic] = *tri;
        let a = disk.vertices[ia].coords;
        let b = disk.vertices[ib].coords;
        let c = disk.vertices[ic].coords;
        let cross = (b - a).cross(&(c - a));
        let nn = cross.norm();
        if nn > 0.0 {
            let n = cross / nn;
            grad[ia] += 0.5 * n.cross(&(c - b));
            grad[ib] += 0.5 * n.cross(&(a - c));
            grad[ic] += 0.5 * n.cross(&(b - a));
        }
        grad[ia] += vol_w * b.cross(&c);
        grad[ib] += vol_w * c.cross(&a);
        grad[ic] += vol_w * a.cross(&b);
    }
    grad
}

/// Per-vertex defect of the discrete balance law: the cotangent mean
/// curvature vector against H times the outward normal of the enclosed
/// region. The normal is the volume-gradient normal per unit mixed area,
/// the weighting the stationary mesh actually satisfies, so the defect
/// vanishes at a discrete CMC configuration instead of plateauing on the
/// mismatch between two normal discretizations.
pub fn residual_defects(disk: &TriangulatedDisk, h: f64) -> Result<Vec<f64>> {
    let field = mean_curvature(disk, &MetricField::Euclidean)?;
    let volume = volume_gradient(disk);
    Ok(field
        .interior()
        .map(|(v, hv)| (hv - volume[v] * (h / field.mixed_areas[v])).norm())
        .collect())
}

/// 95th-percentile mean-curvature defect over interior vertices.
fn residual_p95(disk: &TriangulatedDisk, h: f64) -> Result<f64> {
    let mut defects = residual_defects(disk, h)?;
    if defects.is_empty() {
        return Ok(0.0);
    }
    defects.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    let k = ((0.95 * defects.len() as f64).ceil() as usize).clamp(1, defects.len());
    Ok(defects[k - 1])
}

/// Gauss-Seidel sweeps used to solve the frozen-weight step equation.
const STEP_SOLVE_SWEEPS: usize = 60;

/// Gradient of the cone volume of the disk alone.
fn volume_gradient(disk: &TriangulatedDisk) -> Vec<Vector3<f64>> {
    let mut grad = vec![Vector3::zeros(); disk.vertices.len()];
    for tri in &disk.triangles {
        let [ia, ib, ic] = *tri;
        let a = disk.vertices[ia].coords;
        let b = disk.vertices[ib].coords;
        let c = disk.vertices[ic].coords;
        grad[ia] += b.cross(&c) / 6.0;
        grad[ib] += c.cross(&a) / 6.0;
        grad[ic] += a.cross(&b) / 6.0;
    }
    grad
}

/// Cotangent edge weights of the current mesh, half the usual cot sum per
/// edge so that the weighted graph gradient equals the area gradient.
fn cotangent_weights(disk: &TriangulatedDisk) -> Vec<Vec<(usize, f64)>> {
    let mut edges: std::collections::BTreeMap<(usize, usize), f64> =
        std::collections::BTreeMap::new();
    for tri in &disk.triangles {
        let p = [
            disk.vertices[tri[0]],
            disk.vertices[tri[1]],
            disk.vertices[tri[2]],
        ];
        let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
        let double = e[1].cross(&e[2]).norm();
        if double <= 0.0 {
            continue;
        }
        for k in 0..3 {
            let cot = -e[(k + 1) % 3].dot(&e[(k + 2) % 3]) / double;
            let a = tri[(k + 1) % 3];
            let b = tri[(k + 2) % 3];
            let key = (a.min(b), a.max(b));
            *edges.entry(key).or_insert(0.0) += 0.5 * cot;
        }
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); disk.vertices.len()];
    for (&(a, b), &w) in &edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    adj
}

/// Step direction from one frozen-weight Dirichlet solve: minimize the
/// current-weight spring energy plus the linearized volume term over
/// interior positions, boundary pinned. The stiffness matrix is positive
/// semidefinite (it is a piecewise-linear Dirichlet form), and Gauss-Seidel
/// only ever lowers the model from the zero step, so the returned direction
/// always descends. Solving instead of scaling the gradient is what removes
/// the mesh-size stiffness: one step relaxes every wavelength at once.
fn implicit_step_direction(
    disk: &TriangulatedDisk,
    h: f64,
    interior: &[usize],
) -> Vec<Vector3<f64>> {
    let weights = cotangent_weights(disk);
    let volume = volume_gradient(disk);
    let mut x: Vec<Vector3<f64>> = disk.vertices.iter().map(|p| p.coords).collect();
    for _ in 0..STEP_SOLVE_SWEEPS {
        for &v in interior {
            let mut wsum = 0.0;
            let mut acc = Vector3::zeros();
            for &(u, w) in &weights[v] {
                wsum += w;
                acc += w * x[u];
            }
            if wsum > 1e-12 {
                x[v] = (acc - 2.0 * h * volume[v]) / wsum;
            }
        }
    }
    let mut dir = vec![Vector3::zeros(); disk.vertices.len()];
    for &v in interior {
        dir[v] = x[v] - disk.vertices[v].coords;
    }
    dir
}

struct LevelOutcome {
    iterations: usize,
    converged: bool,
    residual: f64,
}

fn descend_level(
    disk: &mut TriangulatedDisk,
    boundary: &BoundaryCurve,
    domain: &AmbientDomain,
    h: f64,
    opts: &SolveOptions,
    trace: &mut Vec<f64>,
) -> Result<LevelOutcome> {
    let cap = flipped(boundary.cap(opts.side));
    let region = EnclosureRegion::new(disk.clone(), cap)?;
    let cap_flux = region.cap_cone_flux();
    drop(region);

    let diag = disk.bbox_diagonal();
    let degenerate_area = DEGENERATE_AREA_FACTOR * diag * diag;
    let boundary_flag = disk.is_boundary_vertex();
    let interior: Vec<usize> = (0..disk.vertices.len())
        .filter(|&v| !boundary_flag[v])
        .collect();

    let value_of = |area: f64, flux: f64| area + 2.0 * h * (flux + cap_flux) / 3.0;
    let (area, flux, _) = area_flux_min(disk);
    let mut value = value_of(area, flux);
    trace.push(value);

    // The step solve targets the model minimizer, so the natural step is 1.
    let mut step = 1.0f64;
    let mut iterations = 0usize;
    let mut residual = residual_p95(disk, h)?;

    while residual > opts.residual_tol {
        if iterations >= opts.max_iterations {
            return Ok(LevelOutcome {
                iterations,
                converged: false,
                residual,
            });
        }

        let grad = ih_gradient(disk, h);
        let mut dir = implicit_step_direction(disk, h, &interior);
        let mut slope = NeumaierSum::new();
        for &v in &interior {
            slope.add(grad[v].dot(&dir[v]));
        }
        let mut slope = slope.value();
        if !(slope < 0.0) {
            // Inexact solves cannot misalign in theory; guard anyway with
            // the plain preconditioned gradient, which always descends.
            let field = mean_curvature(disk, &MetricField::Euclidean)?;
            let mut raw_slope = NeumaierSum::new();
            for &v in &interior {
                dir[v] = -grad[v] / field.mixed_areas[v].max(degenerate_area);
                raw_slope.add(grad[v].dot(&dir[v]));
            }
            slope = raw_slope.value();
        }
        if !slope.is_finite() || slope >= 0.0 {
            return Ok(LevelOutcome {
                iterations,
                converged: false,
                residual,
            });
        }

        let base: Vec<Point3<f64>> = interior.iter().map(|&v| disk.vertices[v]).collect();
        let mut tau = step.min(1.0);
        let mut accepted = false;
        for halving in 0..=opts.max_halvings {
            for (k, &v) in interior.iter().enumerate() {
                disk.vertices[v] = domain.project(&Point3::from(base[k].coords + tau * dir[v]));
            }
            let (cand_area, cand_flux, cand_min) = area_flux_min(disk);
            let cand = value_of(cand_area, cand_flux);
            if cand_min > degenerate_area
                && cand.is_finite()
                && cand <= value + opts.armijo_slope * tau * slope
            {
                accepted = true;
                value = cand;
                step = if halving == 0 {
                    (tau * opts.step_growth).min(1.0)
                } else {
                    tau
                };
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            for (k, &v) in interior.iter().enumerate() {
                disk.vertices[v] = base[k];
            }
            return Ok(LevelOutcome {
                iterations,
                converged: false,
                residual,
            });
        }

        trace.push(value);
        iterations += 1;
        residual = residual_p95(disk, h)?;
    }

    Ok(LevelOutcome {
        iterations,
        converged: true,
        residual,
    })
}

/// Minimize area + 2H * enclosed volume over interior vertex positions.
///
/// The rim is pinned: `init.boundary_loop[k]` must sit exactly at
/// `boundary.samples[k]`, which is how [`initialize_sweep`] builds the
/// disk. Interior vertices are projected into the closed ball after every
/// trial step. With `refinement_levels > 0` the converged disk and both
/// caps are refined in lock-step and the descent repeats at each level.
///
/// A failed line search reports `converged = false` rather than an error;
/// an H outside the domain's feasible range is an error.
pub fn minimize_ih(
    init: &TriangulatedDisk,
    boundary: &BoundaryCurve,
    domain: &AmbientDomain,
    h: f64,
    opts: &SolveOptions,
) -> Result<(TriangulatedDisk, SolveReport)> {
    domain.require_feasible(h)?;
    if !matches!(domain, AmbientDomain::Ball { .. }) {
        return Err(Error::UnsupportedMetric(
            "the disk energy descent runs in the ball domain".into(),
        ));
    }
    boundary.validate()?;
    if *domain != boundary.domain {
        return Err(Error::Invalid(
            "boundary curve was sampled for a different domain".into(),
        ));
    }
    init.ensure_disk()?;
    if init.boundary_loop.len() != boundary.samples.len() {
        return Err(Error::Invalid(format!(
            "disk rim has {} vertices but the curve has {} samples",
            init.boundary_loop.len(),
            boundary.samples.len()
        )));
    }
    // The stored caps traverse the samples in side-specific order, and an
    // initial disk inherits whichever order its cap used. Check against the
    // cap rim rather than the sample list directly.
    let cap = boundary.cap(opts.side);
    for (k, &v) in init.boundary_loop.iter().enumerate() {
        let r = cap.boundary_loop[k];
        if init.vertices[v] != cap.vertices[r] {
            return Err(Error::Invalid(format!(
                "disk rim vertex {k} is off the curve sample"
            )));
        }
    }

    let mut disk = init.clone();
    let mut bnd = boundary.clone();
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    for level in 0..=opts.refinement_levels {
        if level > 0 {
            bnd = bnd.refined();
            disk = disk.uniform_refine(|_, _, mid, _| mid);
        }
        let out = descend_level(&mut disk, &bnd, domain, h, opts, &mut trace)?;
        iterations += out.iterations;
        converged = out.converged;
        residual = out.residual;
    }

    let region = EnclosureRegion::new(disk.clone(), flipped(bnd.cap(opts.side)))?;
    let depth = disk.ring_depth();
    let violations = h_concavity_check(&region, h)?
        .into_iter()
        .filter(|&v| depth[v] > 2)
        .count();
    let map = disk_reference_map(&disk)?;
    let energies = breakdown(&map, &region, &MetricField::Euclidean, h)?;
    let embedded = is_embedded(&disk, default_tolerance(&disk));
    let report = SolveReport {
        converged,
        iterations,
        residual,
        i_h_trace: trace,
        embedded,
        violations,
        energies,
    };
    Ok((disk, report))
}

/// Warn when H is close enough to the feasible bound that the cap nears a
/// hemisphere of the critical sphere and conditioning degrades.
pub fn near_feasibility_warning(domain: &AmbientDomain, h: f64) -> Option<String> {
    let range = domain.feasible_h_range();
    if range.hi.is_finite() && h > 0.95 * range.hi {
        Some(format!(
            "H = {h} is within 5% of the feasible bound {}; expect slow convergence near the critical sphere",
            range.hi
        ))
    } else {
        None
    }
}

fn directed_hausdorff(a: &TriangulatedDisk, b: &TriangulatedDisk) -> f64 {
    let mut worst = 0.0f64;
    for p in &a.vertices {
        let mut best = f64::INFINITY;
        for q in &b.vertices {
            let d = (p - q).norm();
            if d < best {
                best = d;
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}

/// Symmetric Hausdorff distance between the vertex sets.
pub fn vertex_hausdorff(a: &TriangulatedDisk, b: &TriangulatedDisk) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Area vector of the sample polygon, normalized. Fixed reference for
/// comparing how the two Rellich disks bulge.
pub fn curve_area_normal(boundary: &BoundaryCurve) -> Vector3<f64> {
    let mut n = Vector3::zeros();
    let l = boundary.samples.len();
    for k in 0..l {
        let a = boundary.samples[k].coords;
        let b = boundary.samples[(k + 1) % l].coords;
        n += 0.5 * a.cross(&b);
    }
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        n
    }
}

fn mean_alignment(disk: &TriangulatedDisk, reference: &Vector3<f64>) -> Result<f64> {
    let field = mean_curvature(disk, &MetricField::Euclidean)?;
    let mut sum = NeumaierSum::new();
    let mut count = 0usize;
    for (_, hv) in field.interior() {
        sum.add(hv.dot(reference));
        count += 1;
    }
    if count == 0 {
        return Ok(0.0);
    }
    Ok(sum.value() / count as f64)
}

/// Whether radial projection from the origin maps the disk one-to-one onto
/// the sphere: every triangle transverse to the radial direction, all with
/// the same orientation sign.
pub fn single_valued_radial_graph(disk: &TriangulatedDisk) -> bool {
    let mut sign = 0.0f64;
    for t in 0..disk.triangles.len() {
        let cross = disk.tri_cross(t);
        let tri = disk.triangles[t];
        let centroid = (disk.vertices[tri[0]].coords
            + disk.vertices[tri[1]].coords
            + disk.vertices[tri[2]].coords)
            / 3.0;
        let cn = centroid.norm();
        if cn == 0.0 {
            return false;
        }
        let d = cross.dot(&centroid);
        if d.abs() <= 1e-12 * cross.norm() * cn {
            return false;
        }
        let s = d.signum();
        if sign == 0.0 {
            sign = s;
        } else if s != sign {
            return false;
        }
    }
    true
}

/// Solve both sides of the curve and compare the disks.
pub fn rellich_pair(
    boundary: &BoundaryCurve,
    domain: &AmbientDomain,
    h: f64,
    opts: &SolveOptions,
) -> Result<(TriangulatedDisk, TriangulatedDisk, PairReport)> {
    domain.require_feasible(h)?;
    let run = |side: Side| -> Result<(TriangulatedDisk, SolveReport)> {
        let mut side_opts = *opts;
        side_opts.side = side;
        let init = initialize_sweep(boundary, domain, side)?;
        minimize_ih(&init, boundary, domain, h, &side_opts)
    };
    let (disk_minus, report_minus) = run(Side::Minus)?;
    let (disk_plus, report_plus) = run(Side::Plus)?;
    let reference = curve_area_normal(boundary);
    let pair = PairReport {
        hausdorff: vertex_hausdorff(&disk_minus, &disk_plus),
        alignment_minus: mean_alignment(&disk_minus, &reference)?,
        alignment_plus: mean_alignment(&disk_plus, &reference)?,
        graph_minus: single_valued_radial_graph(&disk_minus),
        graph_plus: single_valued_radial_graph(&disk_plus),
        report_minus,
        report_plus,
    };
    Ok((disk_minus, disk_plus, pair))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::surface_area;
    use crate::scenarios::{equator_curve, latitude_curve, spherical_cap};
    use std::f64::consts::PI;

    fn mirrored(disk: &TriangulatedDisk) -> TriangulatedDisk {
        let mut out = disk.clone();
        for p in &mut out.vertices {
            p.z = -p.z;
        }
        out
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let curve = equator_curve(16).unwrap();
        let domain = AmbientDomain::unit_ball();
        let mut disk = initialize_sweep(&curve, &domain, Side::Minus).unwrap();
        let h = 0.7;
        let grad = ih_gradient(&disk, h);
        let value = |d: &TriangulatedDisk| {
            let (area, flux, _) = area_flux_min(d);
            area + 2.0 * h * flux / 3.0
        };
        let boundary_flag = disk.is_boundary_vertex();
        let eps = 1e-6;
        let mut checked = 0;
        for v in (0..disk.vertices.len()).filter(|&v| !boundary_flag[v]).step_by(7) {
            for axis in 0..3 {
                let orig = disk.vertices[v][axis];
                disk.vertices[v][axis] = orig + eps;
                let up = value(&disk);
                disk.vertices[v][axis] = orig - eps;
                let down = value(&disk);
                disk.vertices[v][axis] = orig;
                let fd = (up - down) / (2.0 * eps);
                assert!(
                    (fd - grad[v][axis]).abs() <= 1e-5 * (1.0 + fd.abs()),
                    "vertex {v} axis {axis}: fd {fd} vs analytic {}",
                    grad[v][axis]
                );
                checked += 1;
            }
        }
        assert!(checked >= 9);
    }

    #[test]
    fn sweep_initialization_stays_inside_and_pins_the_rim() {
        let curve = equator_curve(32).unwrap();
        let domain = AmbientDomain::unit_ball();
        let minus = initialize_sweep(&curve, &domain, Side::Minus).unwrap();
        for (k, &v) in minus.boundary_loop.iter().enumerate() {
            assert_eq!(minus.vertices[v], curve.samples[k]);
        }
        let depth = minus.ring_depth();
        for (v, p) in minus.vertices.iter().enumerate() {
            if depth[v] > 0 {
                assert!(p.coords.norm() < 1.0 - 1e-6, "interior vertex on the sphere");
            }
        }
        // The two sides initialize as mirror images.
        let plus = initialize_sweep(&curve, &domain, Side::Plus).unwrap();
        let flip = mirrored(&minus);
        for p in &flip.vertices {
            let gap = plus
                .vertices
                .iter()
                .map(|q| (q - p).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(gap < 1e-9, "mirror gap {gap:.3e}");
        }
    }

    #[test]
    fn equator_at_h_zero_flattens_to_the_unit_disk() {
        let curve = equator_curve(48).unwrap();
        let domain = AmbientDomain::unit_ball();
        let init = initialize_sweep(&curve, &domain, Side::Minus).unwrap();
        let (disk, report) =
            minimize_ih(&init, &curve, &domain, 0.0, &SolveOptions::default()).unwrap();
        assert!(report.converged, "residual {}", report.residual);
        let area = surface_area(&disk, &MetricField::Euclidean);
        assert!(
            (area - PI).abs() / PI < 0.005,
            "area {area} is not the unit disk"
        );
        for (i, w) in report.i_h_trace.windows(2).enumerate() {
            assert!(
                w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()),
                "trace rises at step {i}"
            );
        }
        assert!(report.embedded);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn equator_cap_matches_the_closed_form() {
        let curve = equator_curve(64).unwrap();
        let domain = AmbientDomain::unit_ball();
        let init = initialize_sweep(&curve, &domain, Side::Minus).unwrap();
        let (disk, report) =
            minimize_ih(&init, &curve, &domain, 0.5, &SolveOptions::default()).unwrap();
        assert!(report.converged, "residual {}", report.residual);
        let oracle = spherical_cap(0.0, 1.0, 0.5, 64, Side::Minus).unwrap();
        let area = surface_area(&disk, &MetricField::Euclidean);
        assert!(
            (area - oracle.area).abs() / oracle.area < 0.01,
            "area {area} vs closed form {}",
            oracle.area
        );
        // Interior strictly inside the open ball.
        let depth = disk.ring_depth();
        for (v, p) in disk.vertices.iter().enumerate() {
            if depth[v] > 0 {
                assert!(p.coords.norm() < 1.0);
            }
        }
        assert!(report.embedded);
        assert_eq!(report.violations, 0);
        assert!(report.energies.defect >= -1e-9);
    }

    #[test]
    fn infeasible_h_is_rejected_with_the_range() {
        let curve = equator_curve(16).unwrap();
        let domain = AmbientDomain::unit_ball();
        let init = initialize_sweep(&curve, &domain, Side::Minus).unwrap();
        let err = minimize_ih(&init, &curve, &domain, 1.25, &SolveOptions::default()).unwrap_err();
        match err {
            Error::InfeasibleH { h, hi, .. } => {
                assert_eq!(h, 1.25);
                assert_eq!(hi, 1.0);
            }
            other => panic!("expected infeasible H, got {other}"),
        }
        assert!(near_feasibility_warning(&domain, 0.97).is_some());
        assert!(near_feasibility_warning(&domain, 0.5).is_none());
    }

    #[test]
    fn rellich_pair_bulges_apart_into_mirror_caps() {
        let curve = equator_curve(48).unwrap();
        let domain = AmbientDomain::unit_ball();
        // The apex keeps creeping outward until late in the descent, so the
        // bulge height needs a tighter stopping tolerance than the default.
        let opts = SolveOptions {
            residual_tol: 0.005,
            ..SolveOptions::default()
        };
        let (minus, plus, pair) = rellich_pair(&curve, &domain, 0.5, &opts).unwrap();
        assert!(pair.report_minus.converged && pair.report_plus.converged);
        assert!(pair.report_minus.embedded && pair.report_plus.embedded);

        // Opposite bulges, both radial graphs.
        assert!(
            pair.alignment_minus * pair.alignment_plus < 0.0,
            "alignments {} / {}",
            pair.alignment_minus,
            pair.alignment_plus
        );
        assert!(pair.graph_minus && pair.graph_plus);

        // Apex separation of the two R = 2 caps.
        let expect = 2.0 * (2.0 - 3.0f64.sqrt());
        assert!(
            (pair.hausdorff - expect).abs() / expect < 0.02,
            "hausdorff {} vs {}",
            pair.hausdorff,
            expect
        );

        // Mirror symmetry within ten residual tolerances.
        let gap = vertex_hausdorff(&mirrored(&minus), &plus);
        assert!(gap <= 10.0 * opts.residual_tol, "mirror gap {gap}");
    }

    #[test]
    fn rellich_sides_coincide_at_h_zero() {
        let curve = equator_curve(32).unwrap();
        let domain = AmbientDomain::unit_ball();
        let (_, _, pair) = rellich_pair(&curve, &domain, 0.0, &SolveOptions::default()).unwrap();
        assert!(pair.report_minus.converged && pair.report_plus.converged);
        // Both flat; separation at mesh-tolerance scale.
        assert!(pair.hausdorff < 0.05, "hausdorff {}", pair.hausdorff);
    }

    #[test]
    fn latitude_cap_converges_for_the_smaller_circle() {
        let curve = latitude_curve(0.9, 48).unwrap();
        let domain = AmbientDomain::unit_ball();
        let init = initialize_sweep(&curve, &domain, Side::Minus).unwrap();
        let (disk, report) =
            minimize_ih(&init, &curve, &domain, 0.5, &SolveOptions::default()).unwrap();
        assert!(report.converged, "residual {}", report.residual);
        let oracle = spherical_cap(0.0, 0.9, 0.5, 48, Side::Minus).unwrap();
        let area = surface_area(&disk, &MetricField::Euclidean);
        assert!(
            (area - oracle.area).abs() / oracle.area < 0.015,
            "area {area} vs {}",
            oracle.area
        );
        assert!(report.embedded);
    }

    #[test]
    fn refinement_tightens_the_cap_area() {
        let curve = equator_curve(24).unwrap();
        let domain = AmbientDomain::unit_ball();
        let init = initialize_sweep(&curve, &domain, Side::Minus).unwrap();
        let mut opts = SolveOptions::default();
        opts.residual_tol = 0.02;
        let (d0, r0) = minimize_ih(&init, &curve, &domain, 0.5, &opts).unwrap();
        opts.refinement_levels = 2;
        let (d2, r2) = minimize_ih(&init, &curve, &domain, 0.5, &opts).unwrap();
        assert!(r0.converged && r2.converged);
        // Successive level differences of the minimum shrink by at least 2x
        // (first-order in the step size h; the area itself converges to the
        // minimum over the fixed rim polygon, so differences are the clean
        // yardstick).
        let a0 = surface_area(&d0, &MetricField::Euclidean);
        let refined_once = {
            opts.refinement_levels = 1;
            let (d1, r1) = minimize_ih(&init, &curve, &domain, 0.5, &opts).unwrap();
            assert!(r1.converged);
            surface_area(&d1, &MetricField::Euclidean)
        };
        let a2 = surface_area(&d2, &MetricField::Euclidean);
        let first = (a0 - refined_once).abs();
        let second = (refined_once - a2).abs();
        assert!(
            second <= first / 2.0 + 1e-12,
            "level differences {first:.3e} then {second:.3e}"
        );
    }
}

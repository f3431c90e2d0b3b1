//! Boundary curves whose obvious spanning surfaces self-intersect.
//!
//! Two constructions on the unit sphere. `gamma1` joins two latitude
//! circles through a narrow bridge, giving a dumbbell curve; the naive
//! spanning surface welds the two analytic caps to a strip across the
//! bridge, and for deep enough caps the two cap sheets pass through each
//! other. `gamma2` weaves one arc over two small circles in the upper
//! hemisphere and closes it with its own mirror image, so the curve is
//! invariant under z -> -z sample for sample and touches the equator at
//! exactly two points.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};

use crate::domain::AmbientDomain;
use crate::error::{Error, Result};
use crate::mesh::TriangulatedDisk;
use crate::meshing::{mesh_spherical_region, sphere_cap};
use crate::region::BoundaryCurve;

#[derive(Clone, Copy, Debug)]
pub enum NonexampleKind {
    Gamma1,
    Gamma2,
}

/// Dumbbell parameters: circles at z = +-`latitude` joined by a bridge of
/// the given width (measured across the gap, in radians of longitude times
/// two, so the corridor is about `bridge_width` wide at the circles).
/// `resolution` is the sample count of a full great circle.
#[derive(Clone, Copy, Debug)]
pub struct Gamma1Params {
    pub latitude: f64,
    pub bridge_width: f64,
    pub resolution: usize,
}

impl Default for Gamma1Params {
    fn default() -> Self {
        Gamma1Params {
            latitude: 0.1,
            bridge_width: 0.05,
            resolution: 160,
        }
    }
}

/// Weave parameters: the four circles sit at latitude +-`bead_latitude`
/// (radians) on the longitudes 0 and pi meridians, each with angular
/// radius `bead_radius`. `resolution` is the sample count of a full great
/// circle.
#[derive(Clone, Copy, Debug)]
pub struct Gamma2Params {
    pub bead_latitude: f64,
    pub bead_radius: f64,
    pub resolution: usize,
}

impl Default for Gamma2Params {
    fn default() -> Self {
        Gamma2Params {
            bead_latitude: 0.45,
            bead_radius: 0.18,
            resolution: 192,
        }
    }
}

/// A curve together with the comparison surfaces the construction carries.
#[derive(Clone, Debug)]
pub struct Nonexample {
    pub curve: BoundaryCurve,
    /// Immersed disk spanning the curve, built from the analytic caps and
    /// the bridge strip. Only the dumbbell has one; it fails embeddedness
    /// whenever the caps reach past each other.
    pub fixture: Option<TriangulatedDisk>,
    /// Constant-curvature caps over the individual circles, one mesh per
    /// circle, without any bridging.
    pub circle_caps: Vec<TriangulatedDisk>,
}

/// Build one of the two curves with its default parameters.
pub fn nonexample_curves(kind: NonexampleKind, h: f64) -> Result<Nonexample> {
    match kind {
        NonexampleKind::Gamma1 => gamma1(&Gamma1Params::default(), h),
        NonexampleKind::Gamma2 => gamma2(&Gamma2Params::default(), h),
    }
}

fn unit_polar(theta: f64, lambda: f64) -> Point3<f64> {
    let (st, ct) = (theta.sin(), theta.cos());
    Point3::new(st * lambda.cos(), st * lambda.sin(), ct)
}

fn reversed_rim(samples: &[Point3<f64>]) -> Vec<Point3<f64>> {
    let l = samples.len();
    (0..l).map(|j| samples[(l - j) % l]).collect()
}

fn mirror(p: &Point3<f64>) -> Point3<f64> {
    Point3::new(p.x, p.y, -p.z)
}

fn seg_seg_distance(a0: &Point3<f64>, a1: &Point3<f64>, b0: &Point3<f64>, b1: &Point3<f64>) -> f64 {
    let u = a1 - a0;
    let v = b1 - b0;
    let w = a0 - b0;
    let (aa, bb, cc) = (u.dot(&u), u.dot(&v), v.dot(&v));
    let (dd, ee) = (u.dot(&w), v.dot(&w));
    let den = aa * cc - bb * bb;
    let mut s = if den > 1e-14 * aa * cc {
        ((bb * ee - cc * dd) / den).clamp(0.0, 1.0)
    } else {
        0.0
    };
    // One refinement pass per segment after clamping.
    let t = ((bb * s + ee) / cc.max(1e-300)).clamp(0.0, 1.0);
    s = ((bb * t - dd) / aa.max(1e-300)).clamp(0.0, 1.0);
    ((a0 + u * s) - (b0 + v * t)).norm()
}

/// True when no two non-adjacent segments of the closed polyline come
/// within `tol` of each other.
pub fn polyline_is_simple(samples: &[Point3<f64>], tol: f64) -> bool {
    let l = samples.len();
    if l < 3 {
        return false;
    }
    for i in 0..l {
        let (a0, a1) = (&samples[i], &samples[(i + 1) % l]);
        for j in i + 2..l {
            if i == 0 && j == l - 1 {
                continue;
            }
            let (b0, b1) = (&samples[j], &samples[(j + 1) % l]);
            if seg_seg_distance(a0, a1, b0, b1) < tol {
                return false;
            }
        }
    }
    true
}

/// Directed boundary edges (present in one triangle, reverse absent)
/// chained into the single loop the winding induces.
fn trace_boundary(triangles: &[[usize; 3]]) -> Result<Vec<usize>> {
    let mut directed = HashSet::new();
    for t in triangles {
        for e in 0..3 {
            directed.insert((t[e], t[(e + 1) % 3]));
        }
    }
    let mut next = HashMap::new();
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) && next.insert(a, b).is_some() {
            return Err(Error::Invalid(format!(
                "boundary branches at vertex {a}"
            )));
        }
    }
    let &start = next
        .keys()
        .min()
        .ok_or_else(|| Error::Invalid("mesh has no boundary".into()))?;
    let mut boundary = vec![start];
    let mut at = next[&start];
    while at != start {
        boundary.push(at);
        at = *next
            .get(&at)
            .ok_or_else(|| Error::Invalid("boundary chain breaks".into()))?;
        if boundary.len() > next.len() {
            return Err(Error::Invalid("boundary loop does not close".into()));
        }
    }
    if boundary.len() != next.len() {
        return Err(Error::Invalid("boundary has several loops".into()));
    }
    Ok(boundary)
}

fn weld_pieces(pieces: &[(Vec<Point3<f64>>, Vec<[usize; 3]>)]) -> (Vec<Point3<f64>>, Vec<[usize; 3]>) {
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (pv, pt) in pieces {
        let mut remap = Vec::with_capacity(pv.len());
        for p in pv {
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            let id = *index.entry(key).or_insert_with(|| {
                vertices.push(*p);
                vertices.len() - 1
            });
            remap.push(id);
        }
        for t in pt {
            triangles.push([remap[t[0]], remap[t[1]], remap[t[2]]]);
        }
    }
    (vertices, triangles)
}

/// Two latitude circles joined through a bridge.
///
/// The curve runs east along the upper circle, down the west side of the
/// bridge, west along the lower circle, and back up the east side. Its two
/// boundary caps are the band between the circles minus the bridge
/// corridor (minus side) and the two polar caps plus the corridor (plus
/// side). The fixture spans the curve with the two radius-1/H caps welded
/// to the corridor strip on the sphere; `h` must leave the caps able to
/// span the circles.
pub fn gamma1(params: &Gamma1Params, h: f64) -> Result<Nonexample> {
    let z1 = params.latitude;
    if !(z1 > 1e-3 && z1 < 0.9) {
        return Err(Error::Invalid(format!(
            "circle latitude {z1} leaves no room between the circles and the poles"
        )));
    }
    let w = params.bridge_width / 2.0;
    if !(w > 1e-4 && w < PI / 4.0) {
        return Err(Error::Invalid(format!(
            "bridge width {} out of range",
            params.bridge_width
        )));
    }
    let theta_p = z1.acos();
    let theta_m = (-z1).acos();
    let rho = theta_p.sin();
    if !(h > 0.0 && h * rho < 1.0) {
        return Err(Error::Invalid(format!(
            "cap sphere of curvature {h} cannot span circles of radius {rho}"
        )));
    }

    let spacing = 2.0 * PI / params.resolution.max(32) as f64;
    let n_c = (((2.0 * PI - 2.0 * w) / spacing).ceil() as usize).max(8);
    let n_s = (((theta_m - theta_p) / spacing).round() as usize).max(2);
    let n_g = ((2.0 * w / spacing).round() as usize).max(2);
    let d_lam = (2.0 * PI - 2.0 * w) / n_c as f64;
    let d_th = (theta_m - theta_p) / n_s as f64;
    // Shared sampling formulas; every piece that meets another one along
    // these points must reuse them bit for bit.
    let gap_lambda = move |j: usize| {
        if j == n_g {
            w
        } else {
            -w + j as f64 * (2.0 * w / n_g as f64)
        }
    };
    let row_theta = |i: usize| if i == n_s { theta_m } else { theta_p + i as f64 * d_th };

    let mut samples = Vec::with_capacity(2 * n_c + 2 * n_s);
    for k in 0..n_c {
        samples.push(unit_polar(theta_p, w + k as f64 * d_lam));
    }
    for i in 0..n_s {
        samples.push(unit_polar(row_theta(i), -w));
    }
    for k in 0..n_c {
        samples.push(unit_polar(theta_m, -w - k as f64 * d_lam));
    }
    for i in 0..n_s {
        samples.push(unit_polar(row_theta(n_s - i), w));
    }

    let rounds = 3;
    let cap_minus = mesh_spherical_region(&samples, Point3::new(0.0, 0.0, 1.0), rounds)?;
    let cap_plus = mesh_spherical_region(
        &reversed_rim(&samples),
        Point3::new(-1.0, 0.0, 0.0),
        rounds,
    )?;
    let curve = BoundaryCurve {
        samples,
        cap_minus,
        cap_plus,
        domain: AmbientDomain::unit_ball(),
    };
    curve.validate()?;

    // Full circles, counterclockwise seen from above, starting at the west
    // corner of the gap so the gap points are the shared corridor columns and
    // the arc points are exactly the curve samples on that circle.
    let upper_circle_ccw = || -> Vec<Point3<f64>> {
        let mut rim = Vec::with_capacity(n_g + n_c);
        for j in 0..n_g {
            rim.push(unit_polar(theta_p, gap_lambda(j)));
        }
        for k in 0..n_c {
            rim.push(unit_polar(theta_p, w + k as f64 * d_lam));
        }
        rim
    };
    let lower_circle_ccw = || -> Vec<Point3<f64>> {
        let mut rim = Vec::with_capacity(n_g + n_c);
        for j in 0..=n_g {
            rim.push(unit_polar(theta_m, gap_lambda(j)));
        }
        for k in (1..n_c).rev() {
            rim.push(unit_polar(theta_m, -w - k as f64 * d_lam));
        }
        rim
    };
    let r = 1.0 / h;
    let c = (r * r - rho * rho).sqrt();
    let theta_cap = (rho / r).min(1.0).asin();
    let rings = (((n_c + n_g) as f64 * theta_cap / (2.0 * PI)).round() as usize).max(2);
    let z_up = theta_p.cos();
    // Upper cap bulges down, lower cap up, so each curves toward the other.
    let cap_up = sphere_cap(
        Point3::new(0.0, 0.0, z_up + c),
        r,
        Vector3::new(0.0, 0.0, -1.0),
        theta_cap,
        &reversed_rim(&upper_circle_ccw()),
        rings,
    )?;
    let cap_down = sphere_cap(
        Point3::new(0.0, 0.0, -z_up - c),
        r,
        Vector3::new(0.0, 0.0, 1.0),
        theta_cap,
        &lower_circle_ccw(),
        rings,
    )?;

    let mut strip_v = Vec::with_capacity((n_s + 1) * (n_g + 1));
    for i in 0..=n_s {
        for j in 0..=n_g {
            strip_v.push(unit_polar(row_theta(i), gap_lambda(j)));
        }
    }
    let g = |i: usize, j: usize| i * (n_g + 1) + j;
    let mut strip_t = Vec::with_capacity(2 * n_s * n_g);
    for i in 0..n_s {
        for j in 0..n_g {
            strip_t.push([g(i, j), g(i, j + 1), g(i + 1, j)]);
            strip_t.push([g(i, j + 1), g(i + 1, j + 1), g(i + 1, j)]);
        }
    }

    let (fv, ft) = weld_pieces(&[
        (cap_up.vertices, cap_up.triangles),
        (strip_v, strip_t),
        (cap_down.vertices, cap_down.triangles),
    ]);
    let boundary = trace_boundary(&ft)?;
    let fixture = TriangulatedDisk::new(fv, ft, boundary);
    fixture.ensure_disk()?;

    Ok(Nonexample {
        curve,
        fixture: Some(fixture),
        circle_caps: Vec::new(),
    })
}

struct WeavePiece {
    at: Box<dyn Fn(f64) -> Point3<f64>>,
    length: f64,
}

fn lat_lon(lat: f64, lon: f64) -> Point3<f64> {
    let (sl, cl) = (lat.sin(), lat.cos());
    Point3::new(cl * lon.cos(), cl * lon.sin(), sl)
}

fn graded(a: (f64, f64), b: (f64, f64)) -> WeavePiece {
    let mid = 0.5 * (a.0 + b.0);
    let length = ((b.0 - a.0).powi(2) + ((b.1 - a.1) * mid.cos()).powi(2)).sqrt();
    WeavePiece {
        at: Box::new(move |t| lat_lon(a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))),
        length,
    }
}

/// Mirror-symmetric weave over four circles.
///
/// One arc starts on the equator, travels east below the first circle's
/// latitude, rounds the circle at longitude 0 and the one at longitude pi
/// the long way over their tops, and comes back down to the equator; the
/// curve is that arc joined to its own reflection through the equator
/// plane. The reflection of every sample is again a sample, so the curve
/// is mirror-invariant exactly.
pub fn gamma2(params: &Gamma2Params, h: f64) -> Result<Nonexample> {
    let c = params.bead_latitude;
    let beta = params.bead_radius;
    if !(beta > 1e-3) {
        return Err(Error::Invalid(format!("circle radius {beta} too small")));
    }
    // Pairwise separation: same-side circles sit 2(pi/2 - c) apart, a
    // circle and its mirror image 2c apart.
    if beta >= PI / 2.0 - c {
        return Err(Error::Invalid(format!(
            "circles overlap: radius {beta} exceeds the same-side separation"
        )));
    }
    if beta >= c {
        return Err(Error::Invalid(format!(
            "circles overlap: radius {beta} reaches the mirror circle across the equator"
        )));
    }
    if c + beta > 1.0 {
        return Err(Error::Invalid(format!(
            "circles reach latitude {} and crowd the pole",
            c + beta
        )));
    }
    if c - beta < 0.1 {
        return Err(Error::Invalid(format!(
            "gap {} between the circles and the equator leaves no room for the weave",
            c - beta
        )));
    }
    if !(h > 0.0 && h * beta.sin() < 1.0) {
        return Err(Error::Invalid(format!(
            "cap sphere of curvature {h} cannot span circles of radius {}",
            beta.sin()
        )));
    }
    let theta_c = PI / 2.0 - c;
    // Longitude half-extent of a circle and the stand-off of the climb
    // strands; the travel latitude passes below the circles.
    let half_ext = (beta.sin() / theta_c.sin()).asin();
    let g = 1.8 * half_ext;
    let ramp = 0.35;
    if g + ramp >= PI / 2.0 - 0.05 {
        return Err(Error::Invalid(format!(
            "circles too wide for the weave: stand-off {g} crowds the equator crossing"
        )));
    }
    let m = 0.5 * (c - beta);

    let bead = move |lon_c: f64, phi: f64| -> Point3<f64> {
        let u = lat_lon(c, lon_c);
        let south = Vector3::new(c.sin() * lon_c.cos(), c.sin() * lon_c.sin(), -c.cos());
        let east = Vector3::new(-lon_c.sin(), lon_c.cos(), 0.0);
        Point3::from(u.coords * beta.cos() + (south * phi.cos() + east * phi.sin()) * beta.sin())
    };
    let lat_of = |p: &Point3<f64>| p.z.asin();
    let lon_of = |p: &Point3<f64>| p.y.atan2(p.x);
    // Entry at the circle's southwest, exit at its southeast, joined the
    // long way over the top.
    let phi_in = -PI / 4.0;
    let phi_span = -1.5 * PI;
    let bead_piece = move |lon_c: f64| WeavePiece {
        at: Box::new(move |t| bead(lon_c, phi_in + t * phi_span)),
        length: 1.5 * PI * beta.sin(),
    };
    let loop_legs = move |lon_c: f64| -> (WeavePiece, WeavePiece, WeavePiece) {
        let e_in = bead(lon_c, phi_in);
        let e_out = bead(lon_c, phi_in + phi_span);
        (
            graded((m, lon_c - g), (lat_of(&e_in), lon_of(&e_in))),
            bead_piece(lon_c),
            graded((lat_of(&e_out), lon_c + 0.7 * half_ext), (m, lon_c + g)),
        )
    };

    let x1 = -PI / 2.0;
    let x2 = 5.0 * PI / 4.0;
    let (climb1, loop1, down1) = loop_legs(0.0);
    let (climb2, loop2, down2) = loop_legs(PI);
    let pieces = vec![
        graded((0.0, x1), (m, x1 + ramp)),
        graded((m, x1 + ramp), (m, -g)),
        climb1,
        loop1,
        down1,
        graded((m, g), (m, PI - g)),
        climb2,
        loop2,
        down2,
        graded((m, PI + g), (m, x2 - ramp)),
        graded((m, x2 - ramp), (0.0, x2)),
    ];

    let spacing = 2.0 * PI / params.resolution.max(64) as f64;
    let mut upper = Vec::new();
    for piece in &pieces {
        let n = ((piece.length / spacing).ceil() as usize).max(2);
        for k in 0..n {
            upper.push((piece.at)(k as f64 / n as f64));
        }
    }
    upper.push(lat_lon(0.0, x2));

    let mut samples = upper.clone();
    for p in upper.iter().rev().skip(1).take(upper.len() - 2) {
        samples.push(mirror(p));
    }
    if !polyline_is_simple(&samples, 1e-6) {
        return Err(Error::Invalid(
            "weave polyline self-intersects for these parameters".into(),
        ));
    }

    let rounds = 3;
    let cap_minus = mesh_spherical_region(&samples, Point3::new(0.0, 0.0, 1.0), rounds)?;
    let cap_plus = mesh_spherical_region(
        &reversed_rim(&samples),
        Point3::new(0.0, 1.0, 0.0),
        rounds,
    )?;
    let curve = BoundaryCurve {
        samples,
        cap_minus,
        cap_plus,
        domain: AmbientDomain::unit_ball(),
    };
    curve.validate()?;

    let rim_n = ((params.resolution as f64 * beta.sin()).ceil() as usize).max(16);
    let mut circle_caps = Vec::with_capacity(4);
    for lon_c in [0.0, PI] {
        for lower in [false, true] {
            circle_caps.push(bead_cap(c, lon_c, beta, h, rim_n, lower)?);
        }
    }

    Ok(Nonexample {
        curve,
        fixture: None,
        circle_caps,
    })
}

/// Constant-curvature cap over one circle of the weave. Upper caps curve
/// toward the ball center, lower caps toward the boundary sphere, so a
/// mirror pair carries opposite curvature vectors.
fn bead_cap(
    c: f64,
    lon_c: f64,
    beta: f64,
    h: f64,
    rim_n: usize,
    lower: bool,
) -> Result<TriangulatedDisk> {
    let sign = if lower { -1.0 } else { 1.0 };
    let u = Vector3::new(
        (PI / 2.0 - c).sin() * lon_c.cos(),
        (PI / 2.0 - c).sin() * lon_c.sin(),
        sign * (PI / 2.0 - c).cos(),
    );
    let south = Vector3::new(
        c.sin() * lon_c.cos(),
        c.sin() * lon_c.sin(),
        -sign * c.cos(),
    );
    let east = Vector3::new(-lon_c.sin(), lon_c.cos(), 0.0);
    let r = 1.0 / h;
    let r_e = beta.sin();
    let d = (r * r - r_e * r_e).sqrt();
    let rim: Vec<Point3<f64>> = (0..rim_n)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / rim_n as f64;
            Point3::from(u * beta.cos() + (south * phi.cos() + east * phi.sin()) * r_e)
        })
        .collect();
    let theta_cap = (r_e / r).min(1.0).asin();
    let rings = ((rim_n as f64 * theta_cap / (2.0 * PI)).round() as usize).max(2);
    // Upstairs (south, east, u) is right-handed and increasing phi runs
    // counterclockwise around u; the mirrored frame is left-handed. Either
    // way the traversal is clockwise around the cap axis, so both branches
    // hand the rim over reversed.
    if lower {
        sphere_cap(
            Point3::from(u * (beta.cos() - d)),
            r,
            u,
            theta_cap,
            &reversed_rim(&rim),
            rings,
        )
    } else {
        sphere_cap(
            Point3::from(u * (beta.cos() + d)),
            r,
            -u,
            theta_cap,
            &reversed_rim(&rim),
            rings,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intersect::is_embedded;

    #[test]
    fn dumbbell_curve_is_simple_and_its_caps_align() {
        let built = gamma1(&Gamma1Params::default(), 0.5).unwrap();
        assert!(polyline_is_simple(&built.curve.samples, 1e-6));
        for p in &built.curve.samples {
            assert!((p.coords.norm() - 1.0).abs() < 1e-12);
        }
        built.curve.validate().unwrap();
        // Stored caps keep their normals into the ball. The first ring next
        // to the boundary may carry a few near-tangent slivers where the
        // region mesher hugs the circles, so it only gets a loose bound.
        for cap in [&built.curve.cap_minus, &built.curve.cap_plus] {
            let normals = cap.vertex_normals();
            let depth = cap.ring_depth();
            for v in 0..cap.vertices.len() {
                let dot = normals[v].dot(&cap.vertices[v].coords);
                if depth[v] >= 2 {
                    assert!(dot < 0.0, "vertex {v} at depth {} leans out: {dot}", depth[v]);
                } else if depth[v] == 1 {
                    assert!(dot < 0.05, "vertex {v} next to the rim folds out: {dot}");
                }
            }
        }
    }

    #[test]
    fn bridged_caps_fixture_spans_the_curve_and_self_intersects() {
        let built = gamma1(&Gamma1Params::default(), 0.5).unwrap();
        let fixture = built.fixture.unwrap();
        fixture.ensure_disk().unwrap();
        assert_eq!(fixture.boundary_loop.len(), built.curve.samples.len());
        let on_curve: HashSet<[u64; 3]> = built
            .curve
            .samples
            .iter()
            .map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()])
            .collect();
        for &v in &fixture.boundary_loop {
            let p = fixture.vertices[v];
            assert!(on_curve.contains(&[p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]));
        }
        // At H = 1/2 each cap reaches 0.165 past the equator plane, well
        // beyond the 0.1 circle height, so the two sheets cross.
        assert!(!is_embedded(&fixture, 1e-7));
    }

    #[test]
    fn shallow_caps_leave_the_fixture_embedded() {
        let params = Gamma1Params {
            latitude: 0.35,
            ..Gamma1Params::default()
        };
        let built = gamma1(&params, 0.2).unwrap();
        assert!(is_embedded(&built.fixture.unwrap(), 1e-7));
    }

    #[test]
    fn dumbbell_rejects_degenerate_parameters() {
        assert!(gamma1(
            &Gamma1Params {
                latitude: 0.0,
                ..Gamma1Params::default()
            },
            0.5
        )
        .is_err());
        assert!(gamma1(
            &Gamma1Params {
                bridge_width: 0.0,
                ..Gamma1Params::default()
            },
            0.5
        )
        .is_err());
        assert!(gamma1(&Gamma1Params::default(), 1.2).is_err());
    }

    #[test]
    fn weave_is_mirror_invariant_sample_for_sample() {
        let built = gamma2(&Gamma2Params::default(), 0.5).unwrap();
        let s = &built.curve.samples;
        let l = s.len();
        for k in 0..l {
            let m = mirror(&s[k]);
            let partner = s[(l - k) % l];
            assert!(
                (m - partner).norm() <= 1e-9,
                "sample {k} breaks the mirror symmetry"
            );
        }
    }

    #[test]
    fn weave_is_simple_with_four_circle_caps() {
        let built = gamma2(&Gamma2Params::default(), 0.5).unwrap();
        assert!(polyline_is_simple(&built.curve.samples, 1e-6));
        built.curve.validate().unwrap();
        assert_eq!(built.circle_caps.len(), 4);
        for cap in &built.circle_caps {
            cap.ensure_disk().unwrap();
            assert!(is_embedded(cap, 1e-9));
        }
        // The curve meets the equator plane at exactly two samples.
        let crossings = built
            .curve
            .samples
            .iter()
            .filter(|p| p.z == 0.0)
            .count();
        assert_eq!(crossings, 2);
    }

    #[test]
    fn weave_rejects_overlapping_circles() {
        assert!(gamma2(
            &Gamma2Params {
                bead_latitude: 0.9,
                bead_radius: 0.75,
                ..Gamma2Params::default()
            },
            0.5
        )
        .is_err());
        assert!(gamma2(
            &Gamma2Params {
                bead_latitude: 0.3,
                bead_radius: 0.35,
                ..Gamma2Params::default()
            },
            0.5
        )
        .is_err());
    }
}

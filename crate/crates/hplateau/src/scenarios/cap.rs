//! Spherical-cap ground truth. A horizontal circle of radius `rho` is
//! spanned by a cap of the sphere of radius 1/H; area and enclosed volume
//! have closed forms, so converged solver output can be judged against
//! exact numbers instead of another discretization.

use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};

use crate::domain::AmbientDomain;
use crate::error::{Error, Result};
use crate::mesh::TriangulatedDisk;
use crate::meshing::{flipped, sphere_cap};
use crate::region::{BoundaryCurve, Side};

/// Analytic constant-mean-curvature cap over a horizontal circle, together
/// with a structured mesh realization.
///
/// Geometry: the cap lies on the sphere of radius `sphere_radius` = 1/H
/// whose center sits on the circle's axis at signed height offset
/// `center_offset` from the circle plane (above the plane for side Minus,
/// below for side Plus, so the cap always bulges toward its own side).
/// `area` and `enclosed_volume` are the exact cap area and the volume
/// between the cap and the flat disk spanning the circle; the volume is
/// reported as a magnitude.
#[derive(Clone, Debug)]
pub struct CapSolution {
    pub z0: f64,
    pub rho: f64,
    pub h: f64,
    pub side: Side,
    pub sphere_radius: f64,
    pub center_offset: f64,
    /// Height of the cap measured from the circle plane.
    pub sagitta: f64,
    pub area: f64,
    pub enclosed_volume: f64,
    /// Mesh realization. Normals point toward the cap-sphere center, which
    /// is the outward direction of the region enclosed with the matching
    /// boundary cap.
    pub mesh: TriangulatedDisk,
}

/// Vertices of the horizontal circle of radius `rho` at height `z0`,
/// counterclockwise seen from above. Every construction that must share
/// the circle bit-exactly goes through this one sampling.
pub fn circle_samples(z0: f64, rho: f64, count: usize) -> Vec<Point3<f64>> {
    (0..count)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / count as f64;
            Point3::new(rho * a.cos(), rho * a.sin(), z0)
        })
        .collect()
}

fn reversed_rim(samples: &[Point3<f64>]) -> Vec<Point3<f64>> {
    let l = samples.len();
    (0..l).map(|j| samples[(l - j) % l]).collect()
}

/// Exact spherical cap spanning the circle of radius `rho` at height `z0`.
///
/// The circle does not have to lie on the unit sphere; the oracle is
/// intrinsic to the circle. `resolution` is the rim vertex count.
pub fn spherical_cap(
    z0: f64,
    rho: f64,
    h: f64,
    resolution: usize,
    side: Side,
) -> Result<CapSolution> {
    if !(rho > 0.0) {
        return Err(Error::Invalid(format!(
            "circle radius must be positive, got {rho}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Invalid(format!(
            "cap oracle needs H > 0 (the H = 0 limit is the flat disk), got {h}"
        )));
    }
    if h * rho > 1.0 {
        return Err(Error::Invalid(format!(
            "cap sphere cannot span circle: H = {h} exceeds 1/rho = {}",
            1.0 / rho
        )));
    }
    let r = 1.0 / h;
    let c = (r * r - rho * rho).max(0.0).sqrt();
    // Sagitta written to stay accurate as the cap flattens (R -> inf).
    let s = rho * rho / (r + c);
    let area = 2.0 * PI * r * s;
    let enclosed_volume = PI * s * s * (3.0 * r - s) / 3.0;

    let rim = circle_samples(z0, rho, resolution.max(8));
    let rings = (resolution / 4).max(2);
    let theta = (rho / r).min(1.0).asin();
    let raw = match side {
        Side::Minus => sphere_cap(
            Point3::new(0.0, 0.0, z0 + c),
            r,
            Vector3::new(0.0, 0.0, -1.0),
            theta,
            &reversed_rim(&rim),
            rings,
        )?,
        Side::Plus => sphere_cap(
            Point3::new(0.0, 0.0, z0 - c),
            r,
            Vector3::new(0.0, 0.0, 1.0),
            theta,
            &rim,
            rings,
        )?,
    };
    let mesh = flipped(&raw);
    Ok(CapSolution {
        z0,
        rho,
        h,
        side,
        sphere_radius: r,
        center_offset: match side {
            Side::Minus => c,
            Side::Plus => -c,
        },
        sagitta: s,
        area,
        enclosed_volume,
        mesh,
    })
}

fn rings_for(resolution: usize, theta: f64) -> usize {
    ((resolution as f64 * theta / (2.0 * PI)).round() as usize).max(2)
}

/// Latitude circle of radius `rho` on the unit sphere, placed in the
/// southern hemisphere (z0 = -sqrt(1 - rho^2)), with both boundary caps
/// meshed and stored in the inward orientation. `resolution` is the number
/// of circle samples.
pub fn latitude_curve(rho: f64, resolution: usize) -> Result<BoundaryCurve> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Invalid(format!(
            "latitude circle must lie on the unit sphere, got rho = {rho}"
        )));
    }
    let z0 = if rho >= 1.0 {
        0.0
    } else {
        -(1.0 - rho * rho).sqrt()
    };
    let samples = circle_samples(z0, rho, resolution.max(8));
    let theta_minus = (-z0).acos();
    let theta_plus = z0.acos();
    let minus_raw = sphere_cap(
        Point3::origin(),
        1.0,
        Vector3::new(0.0, 0.0, -1.0),
        theta_minus,
        &reversed_rim(&samples),
        rings_for(resolution, theta_minus),
    )?;
    let plus_raw = sphere_cap(
        Point3::origin(),
        1.0,
        Vector3::new(0.0, 0.0, 1.0),
        theta_plus,
        &samples,
        rings_for(resolution, theta_plus),
    )?;
    let curve = BoundaryCurve {
        samples,
        cap_minus: flipped(&minus_raw),
        cap_plus: flipped(&plus_raw),
        domain: AmbientDomain::unit_ball(),
    };
    curve.validate()?;
    Ok(curve)
}

/// Equator of the unit ball.
pub fn equator_curve(resolution: usize) -> Result<BoundaryCurve> {
    latitude_curve(1.0, resolution)
}

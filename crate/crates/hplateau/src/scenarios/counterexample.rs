//! The energy staircase on the blended cylinder: an explicit family of
//! spanning disks whose tilted energy is exactly affine in the height
//! parameter, with slope 2*pi*(1 - H). For H > 1 the energy runs to minus
//! infinity along the family, so no minimizer exists there.
//!
//! The disk E_n is a flat annulus in the rim plane, a depth-n cylindrical
//! wall of radius 1, and a flat bottom disk, with the two right-angle
//! corners replaced by one-ring chamfer strips. The wall and bottom sit
//! entirely where the blended metric is flat, so the only metric-sensitive
//! piece is the annulus, which is the same mesh for every n and cancels in
//! energy differences.

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::mesh::TriangulatedDisk;
use crate::metric::{MetricField, BLEND_OUTER_RADIUS};
use crate::region::{metric_volume, patch_area};

/// In-profile radius of the corner chamfers.
pub const CHAMFER_RADIUS: f64 = 0.02;

/// Blend width used when the caller does not pick one.
pub const DEFAULT_BLEND_WIDTH: f64 = 0.05;

/// Azimuthal segments used by the convenience constructors. The wall is a
/// polygonal prism, so the evaluated slope is the polygon perimeter minus
/// 2H times the polygon area; at this count the relative gap to the smooth
/// slope is a few parts in 1e5.
pub const DEFAULT_SEGMENTS: usize = 256;

/// A surface piece that need not be a disk: raw vertices and triangles.
#[derive(Clone, Debug)]
pub struct MeshPatch {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

impl MeshPatch {
    pub fn area(&self, metric: &MetricField) -> f64 {
        patch_area(&self.vertices, &self.triangles, metric)
    }

    pub fn max_radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|p| (p.x * p.x + p.y * p.y).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn translated(&self, dz: f64) -> MeshPatch {
        MeshPatch {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point3::new(p.x, p.y, p.z + dz))
                .collect(),
            triangles: self.triangles.clone(),
        }
    }
}

/// One member of the staircase family, with its constituent pieces and the
/// evaluated energy data.
#[derive(Clone, Debug)]
pub struct CounterexampleFamily {
    pub n: usize,
    pub eps: f64,
    /// Wall slant; 0 for the straight family. The slanted wall runs from
    /// radius 1 + delta at the rim plane to 1 - delta at depth n - delta,
    /// which makes integer vertical translates of the disk disjoint.
    pub delta: f64,
    pub segments: usize,
    pub metric: MetricField,
    /// Assembled spanning disk; its rim is the circle r = 2 in the plane
    /// t = 0.
    pub surface: TriangulatedDisk,
    /// Flat annulus from the wall chamfer to the rim. Identical for every
    /// n, so it drops out of energy differences to the last bit.
    pub annulus: MeshPatch,
    /// Cylinder wall including both chamfer strips.
    pub wall: MeshPatch,
    /// Flat bottom disk.
    pub bottom: MeshPatch,
    /// Wall + bottom + flat lid in the rim plane, oriented outward; bounds
    /// the solid whose volume enters the energy.
    pub enclosure: MeshPatch,
    /// Area of `surface` under `metric`.
    pub area: f64,
    /// Volume bounded by `enclosure` under `metric`.
    pub volume: f64,
    /// Annulus area plus bottom area: the n-independent part of the area.
    pub c0: f64,
    /// area - 2 H volume at the H this family was built for.
    pub i_hat: f64,
}

impl CounterexampleFamily {
    pub fn build(n: usize, eps: f64, delta: f64, segments: usize, h: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Invalid("family height n must be at least 1".into()));
        }
        if segments < 8 {
            return Err(Error::Invalid(format!(
                "family needs at least 8 azimuthal segments, got {segments}"
            )));
        }
        if !(delta >= 0.0 && delta < 0.25) {
            return Err(Error::Invalid(format!(
                "wall slant delta = {delta} outside [0, 1/4)"
            )));
        }
        if !(h > 0.0 && h < 2.0) {
            return Err(Error::Invalid(format!(
                "family energy is defined for H in (0, 2), got {h}"
            )));
        }
        let ch = CHAMFER_RADIUS;
        let annulus_inner = 1.0 + delta + ch;
        if !(eps > 0.0) || BLEND_OUTER_RADIUS - 2.0 * eps <= annulus_inner {
            return Err(Error::Invalid(format!(
                "blend window for eps = {eps} reaches the wall at r = {annulus_inner}"
            )));
        }

        let t_bottom = delta - n as f64;
        // Wall generator from (1 + delta, 0) down to (1 - delta, t_bottom),
        // shortened by one chamfer radius at each end.
        let wall_top = (1.0 + delta, 0.0);
        let wall_bot = (1.0 - delta, t_bottom);
        let len = ((wall_bot.0 - wall_top.0).powi(2) + (wall_bot.1 - wall_top.1).powi(2)).sqrt();
        let dir = ((wall_bot.0 - wall_top.0) / len, (wall_bot.1 - wall_top.1) / len);
        let at = |s: f64| (wall_top.0 + s * dir.0, wall_top.1 + s * dir.1);
        let w_upper = at(ch);
        let w_lower = at(len - ch);
        let bottom_edge = (1.0 - delta - ch, t_bottom);

        // Profiles run bottom-up so the revolve winding orients every piece
        // outward from the enclosed solid: bottom -z, wall +e_r, lid +z.
        let bottom_rings = 4usize;
        let mut bottom_profile = Vec::with_capacity(bottom_rings + 1);
        for j in 0..=bottom_rings {
            let r = bottom_edge.0 * j as f64 / bottom_rings as f64;
            bottom_profile.push((r, t_bottom));
        }

        let wall_spans = ((len - 2.0 * ch).ceil() as usize).max(1);
        let mut wall_profile = Vec::with_capacity(wall_spans + 3);
        wall_profile.push(bottom_edge);
        wall_profile.push(w_lower);
        for j in (1..wall_spans).rev() {
            wall_profile.push(at(ch + (len - 2.0 * ch) * j as f64 / wall_spans as f64));
        }
        wall_profile.push(w_upper);
        wall_profile.push((annulus_inner, 0.0));

        let annulus_rings = 12usize;
        let mut annulus_profile = Vec::with_capacity(annulus_rings + 1);
        for j in 0..=annulus_rings {
            let r = annulus_inner
                + (BLEND_OUTER_RADIUS - annulus_inner) * j as f64 / annulus_rings as f64;
            annulus_profile.push((r, 0.0));
        }

        let lid_rings = 4usize;
        let mut lid_profile = Vec::with_capacity(lid_rings);
        for j in 1..=lid_rings {
            let r = annulus_inner * (1.0 - j as f64 / lid_rings as f64);
            lid_profile.push((r, 0.0));
        }

        let mut surface_profile = bottom_profile.clone();
        surface_profile.extend_from_slice(&wall_profile[1..]);
        surface_profile.extend_from_slice(&annulus_profile[1..]);
        let mut enclosure_profile = bottom_profile.clone();
        enclosure_profile.extend_from_slice(&wall_profile[1..]);
        enclosure_profile.extend_from_slice(&lid_profile);

        let assembled = revolve(&surface_profile, segments);
        let enclosure = revolve(&enclosure_profile, segments);
        let annulus = revolve(&annulus_profile, segments);
        let wall = revolve(&wall_profile, segments);
        let bottom = revolve(&bottom_profile, segments);

        // The outer ring is the last profile entry; the strip winding
        // induces the rim in descending phase order.
        let rim_start = assembled.vertices.len() - segments;
        let mut boundary_loop = Vec::with_capacity(segments);
        boundary_loop.push(rim_start);
        for i in (1..segments).rev() {
            boundary_loop.push(rim_start + i);
        }
        let surface = TriangulatedDisk {
            vertices: assembled.vertices,
            triangles: assembled.triangles,
            boundary_loop,
        };

        let metric = MetricField::ModifiedCylinder { eps };
        let area = patch_area(&surface.vertices, &surface.triangles, &metric);
        let volume = metric_volume(&enclosure.vertices, &enclosure.triangles, &metric);
        let c0 = annulus.area(&metric) + bottom.area(&metric);
        let i_hat = area - 2.0 * h * volume;

        Ok(CounterexampleFamily {
            n,
            eps,
            delta,
            segments,
            metric,
            surface,
            annulus,
            wall,
            bottom,
            enclosure,
            area,
            volume,
            c0,
            i_hat,
        })
    }

    /// area - 2 H volume; the build cost is in the meshes, so sweeping H
    /// over one family is free.
    pub fn i_hat_at(&self, h: f64) -> f64 {
        self.area - 2.0 * h * self.volume
    }

    /// Full structural validation; split from `build` because the checks
    /// cost more than the energy evaluation on fine meshes.
    pub fn validate(&self) -> Result<()> {
        self.surface.ensure_disk()?;
        let flat_limit = BLEND_OUTER_RADIUS - 2.0 * self.eps;
        for (label, patch) in [("wall", &self.wall), ("bottom", &self.bottom)] {
            let r = patch.max_radius();
            if r > flat_limit {
                return Err(Error::Invalid(format!(
                    "{label} piece reaches r = {r}, outside the flat region r <= {flat_limit}"
                )));
            }
        }
        ensure_closed(&self.enclosure)?;
        if self.volume <= 0.0 {
            return Err(Error::Invalid(format!(
                "enclosure is inverted: volume {}",
                self.volume
            )));
        }
        Ok(())
    }
}

/// Builds the straight family member and evaluates its energy under the
/// blended metric.
pub fn counterexample_energy(n: usize, eps: f64, h: f64) -> Result<(CounterexampleFamily, f64)> {
    let family = CounterexampleFamily::build(n, eps, 0.0, DEFAULT_SEGMENTS, h)?;
    let value = family.i_hat;
    Ok((family, value))
}

/// The slanted variant: same staircase energy law, but integer vertical
/// translates of the disk are pairwise disjoint.
pub fn slanted_family(n: usize, delta: f64, h: f64) -> Result<CounterexampleFamily> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::Invalid(format!(
            "slant delta = {delta} outside (0, 1/4)"
        )));
    }
    CounterexampleFamily::build(n, DEFAULT_BLEND_WIDTH, delta, DEFAULT_SEGMENTS, h)
}

/// Revolve an (r, t) profile polyline around the z axis. Entries with
/// r = 0 are poles, allowed only at the ends, and get triangle fans;
/// consecutive ring entries get quad strips. The winding puts the surface
/// normal on the side obtained by rotating the profile direction (dr, dt)
/// a quarter turn to (dt, -dr) in the (r, t) half-plane.
fn revolve(profile: &[(f64, f64)], segments: usize) -> MeshPatch {
    let k = segments;
    let mut vertices = Vec::new();
    let mut starts = Vec::with_capacity(profile.len());
    for (j, &(r, t)) in profile.iter().enumerate() {
        if r == 0.0 {
            debug_assert!(
                j == 0 || j == profile.len() - 1,
                "pole in the middle of a profile"
            );
            starts.push((vertices.len(), true));
            vertices.push(Point3::new(0.0, 0.0, t));
        } else {
            starts.push((vertices.len(), false));
            for i in 0..k {
                let th = std::f64::consts::TAU * i as f64 / k as f64;
                vertices.push(Point3::new(r * th.cos(), r * th.sin(), t));
            }
        }
    }
    let mut triangles = Vec::new();
    for j in 0..profile.len() - 1 {
        let (pa, pole_a) = starts[j];
        let (pb, pole_b) = starts[j + 1];
        match (pole_a, pole_b) {
            (false, false) => {
                for i in 0..k {
                    let i2 = (i + 1) % k;
                    triangles.push([pa + i, pa + i2, pb + i2]);
                    triangles.push([pa + i, pb + i2, pb + i]);
                }
            }
            (true, false) => {
                for i in 0..k {
                    let i2 = (i + 1) % k;
                    triangles.push([pa, pb + i2, pb + i]);
                }
            }
            (false, true) => {
                for i in 0..k {
                    let i2 = (i + 1) % k;
                    triangles.push([pb, pa + i, pa + i2]);
                }
            }
            (true, true) => unreachable!("profile with two adjacent poles"),
        }
    }
    MeshPatch {
        vertices,
        triangles,
    }
}

/// Every edge of a closed surface must be used exactly once in each
/// direction.
fn ensure_closed(patch: &MeshPatch) -> Result<()> {
    use std::collections::HashMap;
    let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
    for tri in &patch.triangles {
        for e in 0..3 {
            let a = tri[e];
            let b = tri[(e + 1) % 3];
            *edges.entry((a.min(b), a.max(b))).or_insert(0) += if a < b { 1 } else { -1 };
        }
    }
    let bad: Vec<(usize, usize)> = edges
        .iter()
        .filter(|&(_, &c)| c != 0)
        .map(|(&e, _)| e)
        .take(4)
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::NotWatertight {
            count: bad.len(),
            sample: bad,
        })
    }
}

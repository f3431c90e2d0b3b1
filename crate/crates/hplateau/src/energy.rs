//! Energy bookkeeping: the geometric functional on enclosures, the bulk
//! functional on parameterized disks, and the exact identity tying them
//! together.
//!
//! For a disk spanning a curve with cap flux C0 and any h:
//!
//!   F_h(u) = 2 I_h(u) - C2 + (E(u) - 2 Area(u)),    C2 = (4/3) h C0
//!
//! which holds exactly for piecewise-linear maps because three times the
//! enclosed volume equals the algebraic volume plus C0. The last bracket is
//! nonnegative and vanishes exactly at conformal parameterizations, so both
//! functionals have the same minimizing surfaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::refmap::ReferenceMap;
use crate::region::EnclosureRegion;

/// Every scalar the identity above mentions, evaluated on one configuration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub algebraic_volume: f64,
    pub f_h: f64,
    pub area: f64,
    pub volume: f64,
    pub i_h: f64,
    /// dirichlet - 2 area; zero exactly for conformal parameterizations.
    pub defect: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

/// Area plus 2 h times enclosed volume.
pub fn i_h(region: &EnclosureRegion, metric: &MetricField, h: f64) -> f64 {
    region.disk_area(metric) + 2.0 * h * region.enclosed_volume(metric)
}

/// Evaluate every functional on one configuration. The parameterized side
/// only makes sense in the flat metric; pass the map whose image is the
/// region's disk.
pub fn breakdown(
    map: &ReferenceMap,
    region: &EnclosureRegion,
    metric: &MetricField,
    h: f64,
) -> Result<EnergyBreakdown> {
    if !matches!(metric, MetricField::Euclidean) {
        return Err(Error::UnsupportedMetric(
            "energy breakdown needs the euclidean metric".into(),
        ));
    }
    if map.image.triangles != region.disk.triangles || map.image.vertices != region.disk.vertices {
        return Err(Error::Invalid(
            "map image and region disk are different meshes".into(),
        ));
    }
    let dirichlet = map.dirichlet_energy()?;
    let w = map.algebraic_volume();
    let area = region.disk_area(metric);
    let volume = region.enclosed_volume(metric);
    let c0 = region.cap_cone_flux();
    let c2 = (4.0 / 3.0) * h * c0;
    Ok(EnergyBreakdown {
        dirichlet,
        algebraic_volume: w,
        f_h: dirichlet + (4.0 / 3.0) * h * w,
        area,
        volume,
        i_h: area + 2.0 * h * volume,
        defect: dirichlet - 2.0 * area,
        h,
        c0,
        c2,
    })
}

/// Signed residual F_h - (2 I_h - C2) for a map spanning the region's disk.
/// Equals the conformality defect (dirichlet - 2 area) up to rounding, so
/// callers compare it against the defect computed from the map alone.
pub fn equivalence_residual(
    map: &ReferenceMap,
    region: &EnclosureRegion,
    h: f64,
) -> Result<f64> {
    let b = breakdown(map, region, &MetricField::Euclidean, h)?;
    Ok(b.f_h - (2.0 * b.i_h - b.c2))
}

/// Absolute residual of the bulk/geometric identity, all terms taken from
/// one breakdown. Measures how exactly the two pipelines agree on the same
/// configuration.
pub fn identity_residual(b: &EnergyBreakdown) -> f64 {
    (b.f_h - (2.0 * b.i_h - b.c2) - b.defect).abs()
}

/// Residual of 3 vol = algebraic volume + C0, the piecewise-linear volume
/// identity behind the equivalence.
pub fn volume_identity_residual(b: &EnergyBreakdown) -> f64 {
    (3.0 * b.volume - (b.algebraic_volume + b.c0)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriangulatedDisk;
    use crate::refmap::disk_reference_map;
    use nalgebra::Point3;

    /// Tetrahedron split into a 3-face disk and a 1-face cap.
    fn tet_region() -> EnclosureRegion {
        let v = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.2, 1.1, 0.0),
            Point3::new(0.3, 0.4, 0.9),
        ];
        // Outward-oriented faces; the cap is the base z = 0.
        let disk = TriangulatedDisk::new(
            v.to_vec(),
            vec![[0, 1, 3], [1, 2, 3], [2, 0, 3]],
            vec![0, 1, 2],
        );
        let cap = TriangulatedDisk::new(
            vec![v[0], v[1], v[2]],
            vec![[0, 2, 1]],
            vec![0, 2, 1],
        );
        EnclosureRegion::new(disk, cap).unwrap()
    }

    #[test]
    fn identity_holds_on_tetrahedron() {
        let region = tet_region();
        let map = disk_reference_map(&region.disk).unwrap();
        let b = breakdown(&map, &region, &MetricField::Euclidean, 0.7).unwrap();
        assert!(identity_residual(&b) < 1e-12);
        assert!(volume_identity_residual(&b) < 1e-12);
        assert!(b.defect >= -1e-12, "defect = {}", b.defect);
        assert!((b.i_h - (b.area + 2.0 * 0.7 * b.volume)).abs() < 1e-15);
        let r = equivalence_residual(&map, &region, 0.7).unwrap();
        assert!((r - b.defect).abs() <= 1e-9 * b.f_h.abs().max(1.0));
    }

    #[test]
    fn identity_holds_for_negative_volume_orientation() {
        // Reflect through z = 0 without rewinding: the surface now bounds
        // the region from inside, volume flips sign, identity must still
        // hold.
        let mut region = tet_region();
        for p in &mut region.disk.vertices {
            p.z = -p.z;
        }
        for p in &mut region.cap.vertices {
            p.z = -p.z;
        }
        let region = EnclosureRegion::new(region.disk, region.cap).unwrap();
        assert!(region.enclosed_volume(&MetricField::Euclidean) < 0.0);
        let map = disk_reference_map(&region.disk).unwrap();
        let b = breakdown(&map, &region, &MetricField::Euclidean, 0.4).unwrap();
        assert!(identity_residual(&b) < 1e-12);
    }

    #[test]
    fn blended_metric_is_rejected_for_breakdown() {
        let region = tet_region();
        let map = disk_reference_map(&region.disk).unwrap();
        let err = breakdown(
            &map,
            &region,
            &MetricField::ModifiedCylinder { eps: 0.05 },
            0.1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnsupportedMetric(_)));
    }

    #[test]
    fn breakdown_serializes_with_upper_case_constants() {
        let region = tet_region();
        let map = disk_reference_map(&region.disk).unwrap();
        let b = breakdown(&map, &region, &MetricField::Euclidean, 0.25).unwrap();
        let json = serde_json::to_value(&b).unwrap();
        assert!(json.get("H").is_some());
        assert!(json.get("C0").is_some());
        assert!(json.get("C2").is_some());
        assert!(json.get("i_h").is_some());
    }
}

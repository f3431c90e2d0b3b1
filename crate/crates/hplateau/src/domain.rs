//! Ambient domains the disks live in.

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricField, BLEND_OUTER_RADIUS};

/// Half-open interval of mean-curvature values the domain supports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HRange {
    pub lo: f64,
    /// Exclusive upper bound.
    pub hi: f64,
}

impl HRange {
    pub fn contains(&self, h: f64) -> bool {
        h >= self.lo && h < self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AmbientDomain {
    Ball { radius: f64 },
    /// Solid cylinder of radius 2 carrying the blended metric.
    ModifiedCylinder { eps: f64 },
}

impl AmbientDomain {
    pub fn unit_ball() -> Self {
        AmbientDomain::Ball { radius: 1.0 }
    }

    pub fn metric(&self) -> MetricField {
        match self {
            AmbientDomain::Ball { .. } => MetricField::Euclidean,
            AmbientDomain::ModifiedCylinder { eps } => MetricField::ModifiedCylinder { eps: *eps },
        }
    }

    /// Mean-curvature values for which the boundary convexity supports the
    /// minimization. A ball of radius R gives [0, 1/R); the blended cylinder
    /// boundary is as convex as a radius-1/4 cylinder, giving [0, 2).
    pub fn feasible_h_range(&self) -> HRange {
        match self {
            AmbientDomain::Ball { radius } => HRange {
                lo: 0.0,
                hi: 1.0 / radius,
            },
            AmbientDomain::ModifiedCylinder { .. } => HRange { lo: 0.0, hi: 2.0 },
        }
    }

    pub fn require_feasible(&self, h: f64) -> Result<()> {
        let range = self.feasible_h_range();
        if range.contains(h) {
            Ok(())
        } else {
            Err(Error::InfeasibleH {
                h,
                lo: range.lo,
                hi: range.hi,
            })
        }
    }

    /// Characteristic length, used to scale offsets and tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            AmbientDomain::Ball { radius } => *radius,
            AmbientDomain::ModifiedCylinder { .. } => BLEND_OUTER_RADIUS,
        }
    }

    pub fn contains(&self, p: &Point3<f64>, slack: f64) -> bool {
        match self {
            AmbientDomain::Ball { radius } => p.coords.norm() <= radius + slack,
            AmbientDomain::ModifiedCylinder { .. } => {
                (p.x * p.x + p.y * p.y).sqrt() <= BLEND_OUTER_RADIUS + slack
            }
        }
    }

    /// Nearest point of the closed domain. The cylinder clamps only the
    /// cylindrical radius; the axial coordinate is unconstrained.
    pub fn project(&self, p: &Point3<f64>) -> Point3<f64> {
        match self {
            AmbientDomain::Ball { radius } => {
                let n = p.coords.norm();
                if n <= *radius || n == 0.0 {
                    *p
                } else {
                    Point3::from(p.coords * (*radius / n))
                }
            }
            AmbientDomain::ModifiedCylinder { .. } => {
                let r = (p.x * p.x + p.y * p.y).sqrt();
                if r <= BLEND_OUTER_RADIUS || r == 0.0 {
                    *p
                } else {
                    let s = BLEND_OUTER_RADIUS / r;
                    Point3::new(p.x * s, p.y * s, p.z)
                }
            }
        }
    }
}

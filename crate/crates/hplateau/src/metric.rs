//! Ambient metrics.
//!
//! Two metrics are supported: the Euclidean one, and a rotationally
//! symmetric blend on the solid cylinder of radius 2 that interpolates, in
//! cylindrical coordinates (r, theta, t), between diag(1, r^2, 1) for
//! r <= 2 - 2*eps and diag(1, (r - 7/4)^2, 1) for r >= 2 - eps. The blend
//! weight is a quintic smoothstep, so the tensor is C^2 across the
//! transition annulus. At r = 2 the angular coefficient equals (1/4)^2:
//! the boundary behaves like a cylinder of radius 1/4 and its inward mean
//! curvature has magnitude 2.

use nalgebra::{Matrix3, Point3};

use crate::numeric::simpson;

pub const BLEND_OUTER_RADIUS: f64 = 2.0;
pub const BLEND_SHIFT: f64 = 7.0 / 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricField {
    Euclidean,
    /// Blended metric on the radius-2 cylinder; `eps` controls the width of
    /// the transition annulus [2 - 2 eps, 2 - eps].
    ModifiedCylinder { eps: f64 },
}

fn smoothstep5(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (s * 6.0 - 15.0) + 10.0)
}

impl MetricField {
    pub fn is_euclidean(&self) -> bool {
        matches!(self, MetricField::Euclidean)
    }

    /// Weight of the flat factor; 1 on [0, 2-2eps], 0 on [2-eps, 2].
    pub fn psi1(&self, r: f64) -> f64 {
        match self {
            MetricField::Euclidean => 1.0,
            MetricField::ModifiedCylinder { eps } => {
                let lo = BLEND_OUTER_RADIUS - 2.0 * eps;
                let hi = BLEND_OUTER_RADIUS - eps;
                if r <= lo {
                    1.0
                } else if r >= hi {
                    0.0
                } else {
                    1.0 - smoothstep5((r - lo) / (hi - lo))
                }
            }
        }
    }

    pub fn psi2(&self, r: f64) -> f64 {
        1.0 - self.psi1(r)
    }

    /// Squared angular coefficient g_{theta theta}(r).
    pub fn angular_sq(&self, r: f64) -> f64 {
        match self {
            MetricField::Euclidean => r * r,
            MetricField::ModifiedCylinder { .. } => {
                let p1 = self.psi1(r);
                let shifted = r - BLEND_SHIFT;
                p1 * r * r + (1.0 - p1) * shifted * shifted
            }
        }
    }

    /// Arc length of the circle at radius r (full turn).
    pub fn circle_length(&self, r: f64) -> f64 {
        std::f64::consts::TAU * self.angular_sq(r).sqrt()
    }

    /// Metric tensor in Cartesian coordinates at `p`. Exactly the identity
    /// wherever the flat weight is exactly 1.
    pub fn tensor(&self, p: &Point3<f64>) -> Matrix3<f64> {
        match self {
            MetricField::Euclidean => Matrix3::identity(),
            MetricField::ModifiedCylinder { eps } => {
                let r2 = p.x * p.x + p.y * p.y;
                let r = r2.sqrt();
                let lo = BLEND_OUTER_RADIUS - 2.0 * eps;
                if r <= lo || r == 0.0 {
                    return Matrix3::identity();
                }
                // g = dr (x) dr + f(r)^2 dtheta (x) dtheta + dz (x) dz with
                // dr = (x dx + y dy)/r, dtheta = (-y dx + x dy)/r^2.
                let f2 = self.angular_sq(r);
                let (x, y) = (p.x, p.y);
                let a = f2 / (r2 * r2);
                let gxx = x * x / r2 + a * y * y;
                let gxy = x * y / r2 - a * x * y;
                let gyy = y * y / r2 + a * x * x;
                Matrix3::new(gxx, gxy, 0.0, gxy, gyy, 0.0, 0.0, 0.0, 1.0)
            }
        }
    }

    /// sqrt(det g) at `p`, the volume density against Lebesgue measure.
    pub fn volume_density(&self, p: &Point3<f64>) -> f64 {
        match self {
            MetricField::Euclidean => 1.0,
            MetricField::ModifiedCylinder { .. } => {
                let r = (p.x * p.x + p.y * p.y).sqrt();
                if r == 0.0 {
                    1.0
                } else {
                    self.angular_sq(r).sqrt() / r
                }
            }
        }
    }

    /// Radial potential h(r) = (1/r) * integral_0^r f(s) ds where
    /// f = sqrt(g_{theta theta}). The Euclidean-divergence of h(r) e_r
    /// equals the volume density, which turns enclosed-volume integrals
    /// into boundary flux sums. Closed form r/2 wherever the metric is flat.
    pub fn radial_flux_potential(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            MetricField::Euclidean => 0.5 * r,
            MetricField::ModifiedCylinder { eps } => {
                let lo = BLEND_OUTER_RADIUS - 2.0 * eps;
                if r <= lo {
                    return 0.5 * r;
                }
                // Integrate piecewise: the density is analytic inside the
                // blend window and exactly s - shift past it, so splitting
                // at the window edges keeps Simpson at full order.
                let hi = BLEND_OUTER_RADIUS - eps;
                let blend_end = r.min(hi);
                let mut acc = 0.5 * lo * lo;
                acc += simpson(|s| self.angular_sq(s).sqrt(), lo, blend_end, 256);
                if r > hi {
                    let a = hi - BLEND_SHIFT;
                    let b = r - BLEND_SHIFT;
                    acc += 0.5 * (b * b - a * a);
                }
                acc / r
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 0.05;

    fn blended() -> MetricField {
        MetricField::ModifiedCylinder { eps: EPS }
    }

    #[test]
    fn partition_of_unity_everywhere() {
        let g = blended();
        for k in 0..=10_000 {
            let r = 2.0 * k as f64 / 10_000.0;
            let s = g.psi1(r) + g.psi2(r);
            assert_eq!(s, 1.0, "psi1+psi2 != 1 at r = {r}");
        }
    }

    #[test]
    fn flat_region_tensor_is_exact_identity() {
        let g = blended();
        for &r in &[0.0, 0.3, 1.0, 1.5, 2.0 - 2.0 * EPS] {
            let p = Point3::new(r * 0.6, r * 0.8, 0.37);
            assert_eq!(g.tensor(&p), Matrix3::identity(), "r = {r}");
        }
    }

    #[test]
    fn boundary_circle_length_matches_shift() {
        let g = blended();
        // At r = 2 the angular factor is (2 - 7/4)^2 = 1/16.
        let len = g.circle_length(2.0);
        assert!((len - std::f64::consts::TAU * 0.25).abs() < 1e-14);
    }

    #[test]
    fn blend_is_monotone_and_smooth_at_ends() {
        let g = blended();
        let lo = 2.0 - 2.0 * EPS;
        let hi = 2.0 - EPS;
        let mut prev = g.psi1(lo);
        for k in 1..=100 {
            let r = lo + (hi - lo) * k as f64 / 100.0;
            let cur = g.psi1(r);
            assert!(cur <= prev + 1e-15);
            prev = cur;
        }
        assert_eq!(g.psi1(lo), 1.0);
        assert_eq!(g.psi1(hi), 0.0);
    }

    #[test]
    fn flux_potential_matches_flat_closed_form() {
        let g = blended();
        assert_eq!(g.radial_flux_potential(1.0), 0.5);
        // Independent check against a much finer seam-aware quadrature of
        // the density over [0, r].
        let r = 1.97;
        let lo = BLEND_OUTER_RADIUS - 2.0 * EPS;
        let hi = BLEND_OUTER_RADIUS - EPS;
        let f = |s: f64| g.angular_sq(s).sqrt();
        let direct = (simpson(f, 0.0, lo, 4096)
            + simpson(f, lo, hi, 4096)
            + simpson(f, hi, r, 4096))
            / r;
        assert!((g.radial_flux_potential(r) - direct).abs() < 1e-11);
    }

    #[test]
    fn tensor_is_rotation_invariant() {
        let g = blended();
        let r = 1.93;
        let p = Point3::new(r, 0.0, 0.0);
        let q = Point3::new(r * 0.5_f64.sqrt(), r * 0.5_f64.sqrt(), 0.0);
        // Compare the induced angular length element at two azimuths.
        let ta = g.tensor(&p);
        let tb = g.tensor(&q);
        let ea = nalgebra::Vector3::new(0.0, 1.0, 0.0);
        let eb = nalgebra::Vector3::new(-0.5_f64.sqrt(), 0.5_f64.sqrt(), 0.0);
        let la = (ta * ea).dot(&ea);
        let lb = (tb * eb).dot(&eb);
        assert!((la - lb).abs() < 1e-13);
        assert!((la - g.angular_sq(r) / (r * r)).abs() < 1e-13);
    }
}

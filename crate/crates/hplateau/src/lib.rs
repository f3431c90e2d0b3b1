//! Discrete minimization of area plus enclosed-volume energies for disks
//! spanning a fixed boundary curve, with mesh quality, embeddedness, and
//! curvature diagnostics.

pub mod curvature;
pub mod domain;
pub mod energy;
pub mod error;
pub mod intersect;
pub mod io;
pub mod mesh;
pub mod meshing;
pub mod metric;
pub mod numeric;
pub mod refmap;
pub mod region;
pub mod scenarios;
pub mod solver;
pub mod surgery;

pub use domain::AmbientDomain;
pub use error::{Error, Result};
pub use mesh::TriangulatedDisk;
pub use metric::MetricField;
pub use region::{BoundaryCurve, EnclosureRegion, Side};

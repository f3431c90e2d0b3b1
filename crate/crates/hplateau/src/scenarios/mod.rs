//! Analytic oracles and named boundary-curve constructions: spherical caps
//! with closed-form area and volume, the tilted-energy staircase family on
//! the blended cylinder metric, and the bridged / symmetric test curves.

pub mod cap;
pub mod counterexample;
pub mod gamma;
pub mod registry;

pub use cap::{equator_curve, latitude_curve, spherical_cap, CapSolution};
pub use counterexample::{counterexample_energy, slanted_family, CounterexampleFamily, MeshPatch};
pub use gamma::{gamma1, gamma2, nonexample_curves, Gamma1Params, Gamma2Params, Nonexample, NonexampleKind};
pub use registry::{run_scenario, scenario_curve, write_scenario, ScenarioOutput, ScenarioParams, SCENARIO_IDS};

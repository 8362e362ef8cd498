//! Dispersion forces between planar magneto-electric bodies and atoms,
//! computed from imaginary-frequency response functions in natural units
//! (ħ = c = ε₀ = μ₀ = 1).

pub mod casimir;
pub mod cp;
pub mod dynamics;
pub mod error;
pub mod material;
pub mod planar;
pub mod quadrature;
pub mod vdw;

pub use casimir::{casimir_pressure, stress_zz, PressureResult, TemperatureSpec};
pub use cp::{cp_force, cp_potential, AtomScenario, Geometry, MirrorKind, Polarizability};
pub use error::{Error, Result};
pub use material::{DrudeLorentzParams, MaterialModel, Response, ZeroFrequency};
pub use planar::{
    cavity_kernel_g, cp_kernel, free_space_green, propagation_b, reflection, Layer, LayerStack,
    PlanarScenario, Polarization, Thickness,
};
pub use quadrature::{QuadResult, QuadSpec, Substitution};
pub use dynamics::{EvolutionResult, QuasiMode, Regime, TwoLevelNearHalfSpace};
pub use vdw::{n_atom_potential, pm_potential, power_law_fit, pp_potential, AtomPair};

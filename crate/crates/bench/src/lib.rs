//! Fixtures shared by the benchmarks.

use dispersion::material::drude_lorentz_example;
use dispersion::{AtomScenario, Geometry, LayerStack, PlanarScenario, Polarizability};

pub fn two_level_atom() -> Polarizability {
    Polarizability::TwoLevel {
        omega10: 1.0,
        alpha0: 1.0,
    }
}

/// Two magneto-dielectric half spaces a distance `d` apart.
pub fn magneto_dielectric_gap(d: f64) -> PlanarScenario {
    let wall = LayerStack::half_space(drude_lorentz_example(5.0).unwrap());
    PlanarScenario::vacuum_gap(wall.clone(), wall, d).unwrap()
}

/// An atom at `z` in front of a magneto-dielectric half space.
pub fn atom_near_wall(z: f64) -> AtomScenario {
    let wall = LayerStack::half_space(drude_lorentz_example(5.0).unwrap());
    AtomScenario::new(two_level_atom(), Geometry::HalfSpace(wall), z).unwrap()
}

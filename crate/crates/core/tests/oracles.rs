//! Public-API results against brute-force integrals written out independently
//! here, in polar coordinates (κ, θ) with ξ = κ cos θ, q = κ sin θ.

use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use dispersion::material::drude_lorentz_example;
use dispersion::{
    casimir_pressure, cp_force, cp_potential, AtomScenario, DrudeLorentzParams, Geometry,
    LayerStack, MaterialModel, PlanarScenario, Polarizability, QuadSpec, TemperatureSpec,
};
use proptest::prelude::*;

fn lorentz(plasma: f64, resonance: f64, damping: f64, xi: f64) -> f64 {
    1.0 + plasma * plasma / (resonance * resonance + xi * xi + damping * xi)
}

/// Reference medium with static permeability `mu0`.
fn medium(mu0: f64, xi: f64) -> (f64, f64) {
    let mu_plasma = (mu0 - 1.0).sqrt();
    (lorentz(0.75, 1.03, 0.001, xi), lorentz(mu_plasma, 1.0, 0.001, xi))
}

/// Half-space Fresnel coefficients (r_s, r_p) seen from vacuum.
fn fresnel(eps: f64, mu: f64, xi: f64, q: f64) -> (f64, f64) {
    let k = (xi * xi + q * q).sqrt();
    let k1 = (eps * mu * xi * xi + q * q).sqrt();
    ((mu * k - k1) / (mu * k + k1), (eps * k - k1) / (eps * k + k1))
}

/// Composite Simpson over κ ∈ (0, ∞) through κ = s t/(1 − t), and θ ∈ (0, π/2).
fn polar<F: Fn(f64, f64) -> f64>(f: F, s: f64, nt: usize, nth: usize) -> f64 {
    let simpson = |g: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize| {
        let h = (b - a) / n as f64;
        let mut acc = g(a) + g(b);
        for i in 1..n {
            acc += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let radial = |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let k = s * t / (1.0 - t);
        let jac = s / ((1.0 - t) * (1.0 - t));
        jac * simpson(&|th: f64| f(k, th), 0.0, FRAC_PI_2, nth)
    };
    simpson(&radial, 0.0, 1.0, nt)
}

fn two_level() -> Polarizability {
    Polarizability::TwoLevel {
        omega10: 1.0,
        alpha0: 1.0,
    }
}

#[test]
fn lifshitz_pressure_matches_polar_oracle() {
    for (mu0, d) in [(1.0, 1.0), (5.0, 0.5), (3.0, 2.0)] {
        let wall = LayerStack::half_space(drude_lorentz_example(mu0).unwrap());
        let scn = PlanarScenario::vacuum_gap(wall.clone(), wall, d).unwrap();
        let got = casimir_pressure(&scn, TemperatureSpec::Zero, &QuadSpec::new(1e-9)).unwrap().value;
        let oracle = polar(
            |k, th| {
                let (xi, q) = (k * th.cos(), k * th.sin());
                let (eps, mu) = medium(mu0, xi);
                let (rs, rp) = fresnel(eps, mu, xi, q);
                let e = (-2.0 * k * d).exp();
                let sum: f64 = [rs, rp].iter().map(|r| r * r * e / (1.0 - r * r * e)).sum();
                k * k * k * th.sin() * sum
            },
            1.0 / d,
            4000,
            200,
        ) / (2.0 * PI * PI);
        assert_relative_eq!(got, oracle, max_relative = 1e-6);
    }
}

#[test]
fn atom_wall_potential_matches_polar_oracle() {
    for (mu0, z) in [(1.0, 0.3), (5.0, 0.5), (5.0, 3.0)] {
        let wall = LayerStack::half_space(drude_lorentz_example(mu0).unwrap());
        let scn = AtomScenario::new(two_level(), Geometry::HalfSpace(wall), z).unwrap();
        let got = cp_potential(&scn, &QuadSpec::new(1e-10)).unwrap();
        let oracle = polar(
            |k, th| {
                let (xi, q) = (k * th.cos(), k * th.sin());
                let (eps, mu) = medium(mu0, xi);
                let (rs, rp) = fresnel(eps, mu, xi, q);
                let alpha = 1.0 / (1.0 + xi * xi);
                alpha * k * th.sin() * (-2.0 * k * z).exp() * (xi * xi * rs - (xi * xi + 2.0 * q * q) * rp)
            },
            0.5 / z,
            4000,
            200,
        ) / (8.0 * PI * PI);
        assert_relative_eq!(got, oracle, max_relative = 1e-6);
    }
}

#[test]
fn finite_temperature_pressure_exceeds_zero_temperature_for_dielectrics() {
    let wall = LayerStack::half_space(MaterialModel::dielectric(DrudeLorentzParams::new(0.75, 1.03, 0.001).unwrap()));
    let scn = PlanarScenario::vacuum_gap(wall.clone(), wall, 3.0).unwrap();
    let spec = QuadSpec::new(1e-8);
    let zero = casimir_pressure(&scn, TemperatureSpec::Zero, &spec).unwrap().value;
    let warm = casimir_pressure(&scn, TemperatureSpec::Finite(0.3), &spec).unwrap().value;
    assert!(warm > zero);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pressure_is_symmetric_under_exchange_of_walls(eps in 1.1f64..8.0, mu in 1.0f64..4.0, d in 0.2f64..5.0) {
        let a = LayerStack::half_space(MaterialModel::constant(eps, 1.0).unwrap());
        let b = LayerStack::slab(MaterialModel::constant(1.5, mu).unwrap(), 0.4).unwrap();
        let spec = QuadSpec::new(1e-9);
        let ab = casimir_pressure(&PlanarScenario::vacuum_gap(a.clone(), b.clone(), d).unwrap(), TemperatureSpec::Zero, &spec).unwrap().value;
        let ba = casimir_pressure(&PlanarScenario::vacuum_gap(b, a, d).unwrap(), TemperatureSpec::Zero, &spec).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-7 * ab.abs());
    }

    #[test]
    fn potential_is_linear_in_the_polarizability(alpha0 in 0.01f64..50.0, z in 0.05f64..5.0) {
        let wall = LayerStack::half_space(drude_lorentz_example(3.0).unwrap());
        let at = |a: f64| {
            let atom = Polarizability::TwoLevel { omega10: 1.0, alpha0: a };
            cp_potential(&AtomScenario::new(atom, Geometry::HalfSpace(wall.clone()), z).unwrap(), &QuadSpec::new(1e-10)).unwrap()
        };
        let (u1, ua) = (at(1.0), at(alpha0));
        prop_assert!((ua - alpha0 * u1).abs() <= 1e-8 * ua.abs());
    }

    #[test]
    fn dielectric_wall_always_attracts(eps_plasma in 0.1f64..3.0, z in 0.02f64..20.0) {
        let m = MaterialModel::dielectric(DrudeLorentzParams::new(eps_plasma, 1.0, 0.01).unwrap());
        let scn = AtomScenario::new(two_level(), Geometry::HalfSpace(LayerStack::half_space(m)), z).unwrap();
        let spec = QuadSpec::new(1e-8);
        prop_assert!(cp_potential(&scn, &spec).unwrap() < 0.0);
        prop_assert!(cp_force(&scn, &spec).unwrap() < 0.0);
    }
}

//! Free-space van der Waals potentials between two or more atoms.

use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::{Matrix3, Vector3};

use crate::casimir::Trap;
use crate::cp::{frequency_scale, Magnetizability, Polarizability};
use crate::error::{require, Error, Result};
use crate::planar::free_space_green_scaled;
use crate::quadrature::{integrate, integrate_from, integrate_semiinf, QuadResult, QuadSpec};

/// Largest atom count accepted by [`n_atom_potential`].
pub const MAX_ATOMS: usize = 6;

/// g(x) = 2e^{−2x}(3 + 6x + 5x² + 2x³ + x⁴).
pub fn kernel_g(x: f64) -> f64 {
    2.0 * (-2.0 * x).exp() * (3.0 + x * (6.0 + x * (5.0 + x * (2.0 + x))))
}

/// h(x) = 2e^{−2x}(1 + 2x + x²).
pub fn kernel_h(x: f64) -> f64 {
    2.0 * (-2.0 * x).exp() * (1.0 + x) * (1.0 + x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomPair {
    pub a: Polarizability,
    /// Polarizability for pp, magnetizability for pm.
    pub b: Magnetizability,
    pub r: f64,
}

impl AtomPair {
    pub fn new(a: Polarizability, b: Magnetizability, r: f64) -> Result<Self> {
        let p = Self { a, b, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate()?;
        self.b.validate()?;
        require(self.r > 0.0 && self.r.is_finite(), || {
            format!("separation must be positive, got {}", self.r)
        })
    }

    pub fn with_r(&self, r: f64) -> Self {
        Self {
            r,
            ..self.clone()
        }
    }

    fn scale(&self) -> f64 {
        let freqs = self
            .a
            .characteristic_frequencies()
            .into_iter()
            .chain(self.b.characteristic_frequencies());
        frequency_scale(0.5 / self.r, freqs)
    }
}

fn frequency_integral<F: Fn(f64) -> f64>(f: F, factor: f64, scale: f64, spec: &QuadSpec) -> Result<f64> {
    integrate_semiinf(f, &spec.with_scale(scale)).scaled(factor).into_result()
}

/// Polarizable–polarizable potential, −(1/32π³r⁶)∫dξ α_A α_B g(ξr).
pub fn pp_potential(pair: &AtomPair, spec: &QuadSpec) -> Result<f64> {
    pair.validate()?;
    if pair.a.is_zero() || pair.b.is_zero() {
        return Ok(0.0);
    }
    let r = pair.r;
    frequency_integral(
        |xi| pair.a.at_ixi(xi) * pair.b.at_ixi(xi) * kernel_g(xi * r),
        -1.0 / (32.0 * PI.powi(3) * r.powi(6)),
        pair.scale(),
        spec,
    )
}

/// Polarizable–magnetizable potential, +(1/32π³r⁴)∫dξ ξ² α_A β_B h(ξr).
pub fn pm_potential(pair: &AtomPair, spec: &QuadSpec) -> Result<f64> {
    pair.validate()?;
    if pair.a.is_zero() || pair.b.is_zero() {
        return Ok(0.0);
    }
    let r = pair.r;
    frequency_integral(
        |xi| xi * xi * pair.a.at_ixi(xi) * pair.b.at_ixi(xi) * kernel_h(xi * r),
        1.0 / (32.0 * PI.powi(3) * r.powi(4)),
        pair.scale(),
        spec,
    )
}

pub fn pp_retarded(alpha_a: f64, alpha_b: f64, r: f64) -> f64 {
    -23.0 * alpha_a * alpha_b / (64.0 * PI.powi(3) * r.powi(7))
}

pub fn pm_retarded(alpha_a: f64, beta_b: f64, r: f64) -> f64 {
    7.0 * alpha_a * beta_b / (64.0 * PI.powi(3) * r.powi(7))
}

/// London limit, −(3/16π³r⁶)∫dξ α_A α_B.
pub fn pp_nonretarded(pair: &AtomPair, spec: &QuadSpec) -> Result<f64> {
    pair.validate()?;
    let scale = frequency_scale(f64::INFINITY, pair.a.characteristic_frequencies());
    let scale = if scale.is_finite() { scale } else { 1.0 };
    let factor = -3.0 / (16.0 * PI.powi(3) * pair.r.powi(6));
    frequency_integral(|xi| pair.a.at_ixi(xi) * pair.b.at_ixi(xi), factor, scale, spec)
}

/// +(1/16π³r⁴)∫dξ ξ² α_A β_B.
pub fn pm_nonretarded(pair: &AtomPair, spec: &QuadSpec) -> Result<f64> {
    pair.validate()?;
    let scale = frequency_scale(f64::INFINITY, pair.a.characteristic_frequencies());
    let scale = if scale.is_finite() { scale } else { 1.0 };
    let factor = 1.0 / (16.0 * PI.powi(3) * pair.r.powi(4));
    frequency_integral(|xi| xi * xi * pair.a.at_ixi(xi) * pair.b.at_ixi(xi), factor, scale, spec)
}

/// N-atom potential from the symmetrised trace of free-space Green tensors
/// around the ring r₁ → r₂ → … → r_N → r₁.
pub fn n_atom_potential(positions: &[Vector3<f64>], responses: &[Polarizability], spec: &QuadSpec) -> Result<f64> {
    let n = positions.len();
    require(n >= 2 && n <= MAX_ATOMS, || {
        format!("atom count must lie in 2..={MAX_ATOMS}, got {n}")
    })?;
    require(responses.len() == n, || {
        format!("{} responses given for {n} positions", responses.len())
    })?;
    responses.iter().try_for_each(|a| a.validate())?;
    for (i, j) in (0..n).tuple_combinations() {
        if positions[i] == positions[j] {
            return Err(Error::Coincidence);
        }
    }
    if responses.iter().any(|a| a.is_zero()) {
        return Ok(0.0);
    }
    let two = n == 2;
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let norm = if two { 1.0 } else { 2.0 } * n as f64;
    let perimeter: f64 = (0..n).map(|k| (positions[k] - positions[(k + 1) % n]).norm()).sum();
    let freqs = responses.iter().flat_map(|a| a.characteristic_frequencies());
    let scale = frequency_scale(1.0 / perimeter, freqs);
    let trap = Trap::default();
    let integrand = |xi: f64| {
        let alphas: f64 = responses.iter().map(|a| a.at_ixi(xi)).product();
        if alphas == 0.0 {
            return 0.0;
        }
        let mut g = vec![Matrix3::<f64>::zeros(); n * n];
        for (i, j) in (0..n).tuple_combinations() {
            match free_space_green_scaled(&(positions[i] - positions[j]), xi) {
                Ok(m) => {
                    g[i * n + j] = m;
                    g[j * n + i] = m;
                }
                Err(e) => return trap.catch(Err(e)),
            }
        }
        let sum: f64 = perms
            .iter()
            .map(|p| {
                (0..n)
                    .fold(Matrix3::<f64>::identity(), |acc, k| acc * g[p[k] * n + p[(k + 1) % n]])
                    .trace()
            })
            .sum();
        alphas * sum / norm
    };
    let v = integrate_semiinf(integrand, &spec.with_scale(scale));
    trap.check()?;
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let pre = sign / (if two { 2.0 } else { 1.0 } * PI);
    v.scaled(pre).into_result()
}

/// Least-squares slope of log|U| against log r over `n_points` log-spaced
/// points in `window`.
pub fn power_law_fit<F>(potential: F, window: (f64, f64), n_points: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (r0, r1) = window;
    require(r0 > 0.0 && r1 > r0, || format!("invalid fit window ({r0}, {r1})"))?;
    require(n_points >= 2, || "a fit needs at least two points".into())?;
    let step = (r1 / r0).ln() / (n_points - 1) as f64;
    let mut pts = Vec::with_capacity(n_points);
    let mut sign = 0.0;
    for k in 0..n_points {
        let r = r0 * (step * k as f64).exp();
        let u = potential(r)?;
        if u == 0.0 || (sign != 0.0 && u.signum() != sign) {
            return Err(Error::MixedRegime);
        }
        sign = u.signum();
        pts.push((r.ln(), u.abs().ln()));
    }
    let m = n_points as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Ok(sxy / sxx)
}

/// Attractive pressure between two half spaces obtained by summing a pair
/// potential over all atom pairs, 2π∫_d^∞ dr (r − d) r |U(r)|, per unit
/// product of densities.
pub fn pairwise_halfspace_pressure<U>(pair_potential: U, d: f64, spec: &QuadSpec) -> Result<f64>
where
    U: Fn(f64) -> Result<f64>,
{
    require(d > 0.0, || format!("separation must be positive, got {d}"))?;
    let trap = Trap::default();
    let f = |r: f64| trap.catch(pair_potential(r)).abs() * (r - d) * r;
    let s = spec.with_scale(d);
    let near = integrate(&f, d, 2.0 * d, spec);
    let far = integrate_from(&f, 2.0 * d, &s);
    trap.check()?;
    QuadResult {
        value: near.value + far.value,
        error: near.error + far.error,
        nodes: near.nodes + far.nodes,
        converged: near.converged && far.converged,
    }
    .scaled(2.0 * PI)
    .into_result()
}

//! Planar layered geometry on the imaginary frequency axis: propagation
//! constants, multilayer reflection coefficients and the kernels built on
//! the planar scattering Green tensor.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::material::{MaterialModel, Response, ZeroFrequency};

/// Layers with `exp(-2 b d)` below this exponent behave as half spaces.
const UNDERFLOW_EXPONENT: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thickness {
    Finite(f64),
    SemiInfinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub thickness: Thickness,
    pub material: MaterialModel,
}

impl Layer {
    pub fn finite(material: MaterialModel, thickness: f64) -> Self {
        Self {
            thickness: Thickness::Finite(thickness),
            material,
        }
    }

    pub fn semi_infinite(material: MaterialModel) -> Self {
        Self {
            thickness: Thickness::SemiInfinite,
            material,
        }
    }
}

/// Ordered layers, starting next to the interspace and ending in a half space.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let stack = Self { layers };
        stack.validate()?;
        Ok(stack)
    }

    pub fn half_space(material: MaterialModel) -> Self {
        Self {
            layers: vec![Layer::semi_infinite(material)],
        }
    }

    pub fn vacuum() -> Self {
        Self::half_space(MaterialModel::Vacuum)
    }

    /// A free-standing slab of the given thickness, vacuum behind it.
    pub fn slab(material: MaterialModel, thickness: f64) -> Result<Self> {
        Self::new(vec![
            Layer::finite(material, thickness),
            Layer::semi_infinite(MaterialModel::Vacuum),
        ])
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.layers.len();
        if n == 0 {
            return Err(Error::InvalidStack("a stack needs at least one layer".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let last = i + 1 == n;
            match layer.thickness {
                Thickness::SemiInfinite if !last => {
                    return Err(Error::InvalidStack(format!(
                        "layer {i} is semi-infinite but not the last layer"
                    )))
                }
                Thickness::Finite(_) if last => {
                    return Err(Error::InvalidStack(
                        "the last layer must be semi-infinite".into(),
                    ))
                }
                Thickness::Finite(d) if !(d > 0.0 && d.is_finite()) => {
                    return Err(Error::InvalidStack(format!(
                        "layer {i} has non-positive thickness {d}"
                    )))
                }
                _ => {}
            }
            if layer.material.is_ideal() && n > 1 {
                return Err(Error::InvalidStack(format!(
                    "ideal {} is only allowed as a single-layer stack",
                    layer.material.name()
                )));
            }
            layer
                .material
                .validate()
                .map_err(|e| Error::InvalidStack(format!("layer {i}: {e}")))?;
        }
        Ok(())
    }

    /// Reflection coefficients (r_s, r_p) of an ideal single-layer stack.
    pub fn ideal_coefficients(&self) -> Option<(f64, f64)> {
        match self.layers.first().map(|l| l.material) {
            Some(MaterialModel::PerfectConductor) => Some((-1.0, 1.0)),
            Some(MaterialModel::PerfectlyPermeable) => Some((1.0, -1.0)),
            _ => None,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        self.layers
            .iter()
            .all(|l| matches!(l.material, MaterialModel::Vacuum))
    }

    pub fn characteristic_frequencies(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.material.characteristic_frequencies())
            .collect()
    }
}

/// Two stacks facing each other across an interspace of width `width`.
/// The left wall occupies z < 0, the right wall z > width.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarScenario {
    pub left: LayerStack,
    pub right: LayerStack,
    pub interspace: MaterialModel,
    pub width: f64,
    pub zero_frequency: ZeroFrequency,
}

impl PlanarScenario {
    pub fn new(left: LayerStack, right: LayerStack, interspace: MaterialModel, width: f64) -> Result<Self> {
        let s = Self {
            left,
            right,
            interspace,
            width,
            zero_frequency: ZeroFrequency::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn vacuum_gap(left: LayerStack, right: LayerStack, width: f64) -> Result<Self> {
        Self::new(left, right, MaterialModel::Vacuum, width)
    }

    pub fn with_zero_frequency(mut self, zero: ZeroFrequency) -> Self {
        self.zero_frequency = zero;
        self
    }

    pub fn with_width(&self, width: f64) -> Self {
        Self {
            width,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        if self.interspace.is_ideal() {
            return Err(Error::InvalidParameter(
                "the interspace cannot be an ideal reflector".into(),
            ));
        }
        self.interspace.validate()?;
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interspace width must be positive, got {}",
                self.width
            )));
        }
        Ok(())
    }

    pub fn characteristic_frequencies(&self) -> Vec<f64> {
        let mut out = self.left.characteristic_frequencies();
        out.extend(self.right.characteristic_frequencies());
        out.extend(self.interspace.characteristic_frequencies());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    S,
    P,
}

/// b = √(εμξ² + q²).
pub fn propagation_b(xi: f64, q: f64, eps: f64, mu: f64) -> Result<f64> {
    if xi == 0.0 && q == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    Ok((eps * mu * xi * xi + q * q).sqrt())
}

/// Fresnel coefficient of the interface between a lower-index layer `lo`
/// (the side the wave arrives from) and the next layer `up`, with
/// `p` the permeability (s) or permittivity (p) of each side.
fn interface(p_lo: f64, b_lo: f64, k2_lo: f64, p_up: f64, b_up: f64, k2_up: f64) -> f64 {
    match (p_lo.is_infinite(), p_up.is_infinite()) {
        (false, true) => 1.0,
        (true, false) => -1.0,
        (true, true) => (b_lo - b_up) / (b_lo + b_up),
        (false, false) => {
            // b_lo − b_up without cancellation at large q
            let db = (k2_lo - k2_up) / (b_lo + b_up);
            let num = p_up * db + (p_up - p_lo) * b_up;
            let den = p_up * b_lo + p_lo * b_up;
            num / den
        }
    }
}

#[derive(Debug, Clone)]
enum Wall {
    Ideal { rs: f64, rp: f64 },
    Layers { layers: Vec<(Response, f64)> },
}

/// A stack with all material responses evaluated at one imaginary frequency.
#[derive(Debug, Clone)]
pub struct StackAtXi {
    ambient: Response,
    wall: Wall,
}

impl StackAtXi {
    pub fn new(stack: &LayerStack, ambient: Response, xi: f64, zero: ZeroFrequency) -> Result<Self> {
        let wall = if let Some((rs, rp)) = stack.ideal_coefficients() {
            Wall::Ideal { rs, rp }
        } else {
            let mut layers = Vec::with_capacity(stack.layers().len());
            for layer in stack.layers() {
                let resp = layer.material.response(xi, zero)?;
                let d = match layer.thickness {
                    Thickness::Finite(d) => d,
                    Thickness::SemiInfinite => f64::INFINITY,
                };
                layers.push((resp, d));
            }
            Wall::Layers { layers }
        };
        Ok(Self { ambient, wall })
    }

    /// (r_s, r_p) at transverse wavenumber q.
    pub fn coefficients(&self, q: f64) -> Result<(f64, f64)> {
        match &self.wall {
            Wall::Ideal { rs, rp } => Ok((*rs, *rp)),
            Wall::Layers { layers } => {
                let b0 = self.ambient.propagation(q);
                if b0 == 0.0 {
                    return Err(Error::DegeneratePoint);
                }
                // walk from the terminal half space back to the ambient
                let mut rs = 0.0;
                let mut rp = 0.0;
                for j in (0..layers.len()).rev() {
                    let (up, d_up) = layers[j];
                    let b_up = up.propagation(q);
                    let (lo, b_lo) = if j == 0 {
                        (self.ambient, b0)
                    } else {
                        let lo = layers[j - 1].0;
                        (lo, lo.propagation(q))
                    };
                    let rho_s = interface(lo.mu, b_lo, lo.k2, up.mu, b_up, up.k2);
                    let rho_p = interface(lo.eps, b_lo, lo.k2, up.eps, b_up, up.k2);
                    let exponent = -2.0 * b_up * d_up;
                    let e = if exponent < UNDERFLOW_EXPONENT || d_up.is_infinite() {
                        0.0
                    } else {
                        exponent.exp()
                    };
                    rs = (rho_s + e * rs) / (1.0 + rho_s * e * rs);
                    rp = (rho_p + e * rp) / (1.0 + rho_p * e * rp);
                }
                Ok((rs, rp))
            }
        }
    }
}

/// Reflection coefficient of `stack` seen from a medium `ambient`.
pub fn reflection(
    stack: &LayerStack,
    ambient: &MaterialModel,
    xi: f64,
    q: f64,
    pol: Polarization,
) -> Result<f64> {
    reflection_with(stack, ambient, xi, q, pol, ZeroFrequency::default())
}

pub fn reflection_with(
    stack: &LayerStack,
    ambient: &MaterialModel,
    xi: f64,
    q: f64,
    pol: Polarization,
    zero: ZeroFrequency,
) -> Result<f64> {
    stack.validate()?;
    if xi == 0.0 && q == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    let amb = ambient.response(xi, zero)?;
    let (rs, rp) = StackAtXi::new(stack, amb, xi, zero)?.coefficients(q)?;
    Ok(match pol {
        Polarization::S => rs,
        Polarization::P => rp,
    })
}

/// Everything the cavity kernels need at one (ξ, q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityPoint {
    pub q: f64,
    pub b: f64,
    pub rs_minus: f64,
    pub rs_plus: f64,
    pub rp_minus: f64,
    pub rp_plus: f64,
    pub ds: f64,
    pub dp: f64,
    /// e^{−2bd}
    pub round_trip: f64,
}

/// A planar scenario with all responses evaluated at one imaginary frequency.
#[derive(Debug, Clone)]
pub struct CavityAtXi {
    pub xi: f64,
    pub width: f64,
    pub gap: Response,
    left: StackAtXi,
    right: StackAtXi,
}

impl CavityAtXi {
    pub fn new(scn: &PlanarScenario, xi: f64) -> Result<Self> {
        let gap = scn.interspace.response(xi, scn.zero_frequency)?;
        Ok(Self {
            xi,
            width: scn.width,
            gap,
            left: StackAtXi::new(&scn.left, gap, xi, scn.zero_frequency)?,
            right: StackAtXi::new(&scn.right, gap, xi, scn.zero_frequency)?,
        })
    }

    /// Lower limit √(εμ)ξ of the b integration.
    pub fn b_min(&self) -> f64 {
        self.gap.k2.sqrt()
    }

    pub fn point_b(&self, b: f64, q: f64) -> Result<CavityPoint> {
        if b == 0.0 {
            return Err(Error::DegeneratePoint);
        }
        let (rs_minus, rp_minus) = self.left.coefficients(q)?;
        let (rs_plus, rp_plus) = self.right.coefficients(q)?;
        let exponent = -2.0 * b * self.width;
        let round_trip = if exponent < UNDERFLOW_EXPONENT {
            0.0
        } else {
            exponent.exp()
        };
        let ds = 1.0 - rs_plus * rs_minus * round_trip;
        let dp = 1.0 - rp_plus * rp_minus * round_trip;
        if !(ds > 0.0) {
            return Err(Error::UnphysicalDenominator(ds));
        }
        if !(dp > 0.0) {
            return Err(Error::UnphysicalDenominator(dp));
        }
        Ok(CavityPoint {
            q,
            b,
            rs_minus,
            rs_plus,
            rp_minus,
            rp_plus,
            ds,
            dp,
            round_trip,
        })
    }

    pub fn point(&self, q: f64) -> Result<CavityPoint> {
        self.point_b(self.gap.propagation(q), q)
    }

    /// The function g(z, iξ, q) entering the interspace stress.
    pub fn stress_g(&self, p: &CavityPoint, z: f64) -> f64 {
        let inv_n2 = 1.0 / (self.gap.eps * self.gap.mu);
        let b2 = p.b * p.b;
        let q2 = p.q * p.q;
        let sum = b2 * (1.0 + inv_n2);
        let diff = q2 * (1.0 - inv_n2);
        let mut g = -2.0 * (sum + diff) * p.round_trip * p.rs_plus * p.rs_minus / p.ds
            - 2.0 * (sum - diff) * p.round_trip * p.rp_plus * p.rp_minus / p.dp;
        let c = self.gap.k2 * (1.0 - inv_n2);
        if c != 0.0 {
            let left = decay(p.b, z);
            let right = decay(p.b, self.width - z);
            g += c * (left * p.rs_minus + right * p.rs_plus) / p.ds;
            g -= c * (left * p.rp_minus + right * p.rp_plus) / p.dp;
        }
        g
    }

    /// ξ² times the braces of the atom–cavity integrand, without the q/b
    /// Jacobian. With `multiple = false` the denominators D_σ are set to 1.
    pub fn cp_bracket(&self, p: &CavityPoint, z: f64, multiple: bool) -> f64 {
        let xi2 = self.xi * self.xi;
        let wp = xi2 + 2.0 * p.q * p.q;
        let (ds, dp) = if multiple { (p.ds, p.dp) } else { (1.0, 1.0) };
        let mut out = 0.0;
        if p.rs_minus != 0.0 || p.rp_minus != 0.0 {
            out += decay(p.b, z) * (xi2 * p.rs_minus / ds - wp * p.rp_minus / dp);
        }
        if p.rs_plus != 0.0 || p.rp_plus != 0.0 {
            out += decay(p.b, self.width - z) * (xi2 * p.rs_plus / ds - wp * p.rp_plus / dp);
        }
        out
    }

    /// z-derivative of [`Self::cp_bracket`].
    pub fn cp_bracket_dz(&self, p: &CavityPoint, z: f64) -> f64 {
        let xi2 = self.xi * self.xi;
        let wp = xi2 + 2.0 * p.q * p.q;
        let mut out = 0.0;
        if p.rs_minus != 0.0 || p.rp_minus != 0.0 {
            out -= 2.0 * p.b * decay(p.b, z) * (xi2 * p.rs_minus / p.ds - wp * p.rp_minus / p.dp);
        }
        if p.rs_plus != 0.0 || p.rp_plus != 0.0 {
            out += 2.0
                * p.b
                * decay(p.b, self.width - z)
                * (xi2 * p.rs_plus / p.ds - wp * p.rp_plus / p.dp);
        }
        out
    }
}

fn decay(b: f64, z: f64) -> f64 {
    let exponent = -2.0 * b * z;
    if exponent < UNDERFLOW_EXPONENT {
        0.0
    } else {
        exponent.exp()
    }
}

fn check_interior(scn: &PlanarScenario, z: f64) -> Result<()> {
    if !(z > 0.0 && z < scn.width) {
        return Err(Error::InvalidParameter(format!(
            "z = {z} must lie inside the interspace (0, {})",
            scn.width
        )));
    }
    Ok(())
}

/// g(z, iξ, q) of the interspace stress for 0 < z < d.
pub fn cavity_kernel_g(scn: &PlanarScenario, z: f64, xi: f64, q: f64) -> Result<f64> {
    scn.validate()?;
    check_interior(scn, z)?;
    if xi == 0.0 && q == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    let cav = CavityAtXi::new(scn, xi)?;
    let p = cav.point(q)?;
    Ok(cav.stress_g(&p, z))
}

/// Integrand of the atom–cavity potential in q at fixed ξ > 0 (vacuum interspace),
/// (q/b){e^{−2bz}[r_s−/D_s − (1+2q²/ξ²) r_p−/D_p] + e^{−2b(d−z)}[…+]}.
pub fn cp_kernel(scn: &PlanarScenario, z: f64, xi: f64, q: f64) -> Result<f64> {
    scn.validate()?;
    check_interior(scn, z)?;
    if !matches!(scn.interspace, MaterialModel::Vacuum) {
        return Err(Error::InvalidParameter(
            "the atom potential needs a vacuum interspace".into(),
        ));
    }
    if !(xi > 0.0) {
        return Err(Error::InvalidParameter("ξ must be positive".into()));
    }
    let cav = CavityAtXi::new(scn, xi)?;
    let p = cav.point(q)?;
    Ok(p.q / p.b * cav.cp_bracket(&p, z, true) / (xi * xi))
}

/// ξ² G(r, r', iξ) for free space, excluding the coincidence term.
///
/// The ξ² factor keeps the result finite as ξ → 0.
pub fn free_space_green_scaled(rho: &Vector3<f64>, xi: f64) -> Result<Matrix3<f64>> {
    let r = rho.norm();
    if r == 0.0 {
        return Err(Error::Coincidence);
    }
    let x = xi * r;
    let a = 1.0 + x + x * x;
    let bb = 3.0 + 3.0 * x + x * x;
    let e = rho / r;
    let pre = (-x).exp() / (4.0 * PI * r * r * r);
    Ok(pre * (a * Matrix3::identity() - bb * e * e.transpose()))
}

/// Free-space Green tensor G(r, r', iξ) for ρ = r − r' ≠ 0.
pub fn free_space_green(rho: &Vector3<f64>, xi: f64) -> Result<Matrix3<f64>> {
    if !(xi > 0.0) {
        return Err(Error::InvalidParameter("ξ must be positive".into()));
    }
    Ok(free_space_green_scaled(rho, xi)? / (xi * xi))
}

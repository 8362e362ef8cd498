//! Adaptive quadrature on semi-infinite ranges and the iterated (ξ, q)
//! driver used by every frequency/wavenumber integral in the crate.
//!
//! The base rule is the 7/15-point Gauss–Kronrod pair. Its nodes are all
//! interior, so integrands with removable 0/0 limits at an endpoint (the
//! ξ → 0 end of most kernels) are never evaluated there. Panels are bisected
//! in order of decreasing error estimate; evaluation and accumulation order
//! are fixed, so identical inputs give bit-identical results.

use std::cell::Cell;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Map from the unit interval onto a semi-infinite range `[a, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Substitution {
    /// x = a + s·t/(1−t)
    Rational { scale: f64 },
    /// x = a − s·ln(1−t)
    Exponential { scale: f64 },
}

impl Substitution {
    fn map(&self, t: f64) -> (f64, f64) {
        match *self {
            Substitution::Rational { scale } => {
                let u = 1.0 - t;
                (scale * t / u, scale / (u * u))
            }
            Substitution::Exponential { scale } => {
                let u = 1.0 - t;
                (-scale * u.ln(), scale / u)
            }
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            Substitution::Rational { scale } | Substitution::Exponential { scale } => scale,
        }
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        match *self {
            Substitution::Rational { .. } => Substitution::Rational { scale },
            Substitution::Exponential { .. } => Substitution::Exponential { scale },
        }
    }
}

/// Tolerances and limits for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_subdivisions: usize,
    pub substitution: Substitution,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_floor: 0.0,
            max_subdivisions: 400,
            substitution: Substitution::Rational { scale: 1.0 },
        }
    }
}

impl QuadSpec {
    pub fn new(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_floor >= 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerance must be positive".into(),
            ));
        }
        if self.max_subdivisions < 8 {
            return Err(Error::InvalidParameter(
                "at least 8 subdivisions are required".into(),
            ));
        }
        if !(self.substitution.scale() > 0.0) {
            return Err(Error::InvalidParameter(
                "substitution scale must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.substitution = self.substitution.with_scale(scale);
        self
    }

    pub fn with_floor(mut self, abs_floor: f64) -> Self {
        self.abs_floor = abs_floor;
        self
    }

    /// Halves the relative tolerance, for the two levels of an iterated integral.
    pub fn halved(mut self) -> Self {
        self.rel_tol *= 0.5;
        self.abs_floor *= 0.5;
        self
    }

    fn target(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
    pub converged: bool,
}

impl QuadResult {
    /// Turns a flagged result into [`Error::Convergence`].
    pub fn into_result(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Convergence {
                value: self.value,
                error: self.error,
                nodes: self.nodes,
            })
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.abs(),
            ..self
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = res_k * half;
    let error = rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h);
    Panel { a, b, value, error }
}

/// Adaptive Gauss–Kronrod integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadSpec) -> QuadResult {
    const INITIAL_PANELS: usize = 4;
    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions + INITIAL_PANELS);
    let width = (b - a) / INITIAL_PANELS as f64;
    for i in 0..INITIAL_PANELS {
        let lo = a + width * i as f64;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
        heap.push(gk15(&f, lo, hi));
    }
    let mut nodes = 15 * INITIAL_PANELS;
    let sums = |heap: &BinaryHeap<Panel>| -> (f64, f64) {
        // ordered summation keeps results reproducible
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = sums(&heap);
    let mut splits = 0;
    while splits < spec.max_subdivisions {
        if error <= spec.target(value) {
            (value, error) = sums(&heap);
            if error <= spec.target(value) {
                break;
            }
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let (left, right) = (gk15(&f, worst.a, mid), gk15(&f, mid, worst.b));
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        nodes += 30;
        splits += 1;
    }
    let (value, error) = sums(&heap);
    let converged = error <= spec.target(value) && value.is_finite();
    QuadResult {
        value,
        error,
        nodes,
        converged,
    }
}

/// ∫_a^∞ f(x) dx via the substitution in `spec`.
pub fn integrate_from<F: Fn(f64) -> f64>(f: F, a: f64, spec: &QuadSpec) -> QuadResult {
    let sub = spec.substitution;
    let g = |t: f64| {
        let (x, jac) = sub.map(t);
        if !(x.is_finite() && jac.is_finite()) {
            return 0.0;
        }
        let v = f(a + x);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    integrate(g, 0.0, 1.0, spec)
}

/// ∫_0^∞ f(x) dx.
pub fn integrate_semiinf<F: Fn(f64) -> f64>(f: F, spec: &QuadSpec) -> QuadResult {
    integrate_from(f, 0.0, spec)
}

fn combine(outer: QuadResult, nodes: usize, inner_ok: bool, inner_rel: f64) -> QuadResult {
    QuadResult {
        value: outer.value,
        error: outer.error + inner_rel * outer.value.abs(),
        nodes,
        converged: outer.converged && inner_ok,
    }
}

/// Iterated integral ∫_0^∞ dξ ∫_0^∞ dq kernel(ξ, q).
///
/// The tolerance budget is split evenly between the two levels.
pub fn integrate_xi_q<F>(kernel: F, xi_spec: &QuadSpec, q_spec: &QuadSpec) -> QuadResult
where
    F: Fn(f64, f64) -> f64,
{
    let nodes = Cell::new(0usize);
    let inner_ok = Cell::new(true);
    let inner_rel = Cell::new(0.0f64);
    let inner_spec = q_spec.halved();
    let outer = integrate_semiinf(
        |xi| {
            let r = integrate_semiinf(|q| kernel(xi, q), &inner_spec);
            track(&r, &nodes, &inner_ok, &inner_rel);
            r.value
        },
        &xi_spec.halved(),
    );
    combine(outer, nodes.get(), inner_ok.get(), inner_rel.get())
}

/// Iterated integral in which the inner variable is b = √(k² + q²) with k = k(ξ):
///
/// ∫_0^∞ dξ ∫_{k(ξ)}^∞ db h(ξ, b, q),
///
/// which equals ∫dξ ∫dq (q/b) h(ξ, b(q), q). The Jacobian q/b of the
/// wavenumber integral is absorbed, so kernels carrying that factor become
/// smooth at q → 0.
pub fn integrate_xi_b<H, K>(h: H, lower: K, xi_spec: &QuadSpec, b_spec: &QuadSpec) -> QuadResult
where
    H: Fn(f64, f64, f64) -> f64,
    K: Fn(f64) -> f64,
{
    let nodes = Cell::new(0usize);
    let inner_ok = Cell::new(true);
    let inner_rel = Cell::new(0.0f64);
    let inner_spec = b_spec.halved();
    let outer = integrate_semiinf(
        |xi| {
            let r = inner_b(&h, xi, lower(xi), &inner_spec);
            track(&r, &nodes, &inner_ok, &inner_rel);
            r.value
        },
        &xi_spec.halved(),
    );
    combine(outer, nodes.get(), inner_ok.get(), inner_rel.get())
}

/// ∫_{k}^∞ db h(ξ, b, q) at fixed ξ, with q = √(b² − k²).
pub fn inner_b<H>(h: &H, xi: f64, k: f64, spec: &QuadSpec) -> QuadResult
where
    H: Fn(f64, f64, f64) -> f64,
{
    integrate_semiinf(
        |s| {
            let q = (s * (s + 2.0 * k)).sqrt();
            h(xi, k + s, q)
        },
        spec,
    )
}

fn track(r: &QuadResult, nodes: &Cell<usize>, ok: &Cell<bool>, rel: &Cell<f64>) {
    nodes.set(nodes.get() + r.nodes);
    if !r.converged {
        ok.set(false);
    }
    if r.value != 0.0 {
        rel.set(rel.get().max(r.error / r.value.abs()));
    }
}

/// Finite-temperature replacement of (1/π)∫_0^∞ dξ f(ξ):
///
/// 2T [½ f(0) + Σ_{n≥1} f(ξ_n)],  ξ_n = 2πT n   (ħ = k_B = 1).
///
/// Summation stops once, for three consecutive terms, the term plus its
/// geometric continuation falls below `rel_tol·|partial sum|` (or the absolute floor); a geometric tail
/// estimated from the last terms is then added and reported as the error.
pub fn matsubara_sum<F: Fn(f64) -> f64>(f: F, temperature: f64, spec: &QuadSpec) -> QuadResult {
    const MAX_TERMS: usize = 200_000;
    if !(temperature > 0.0) {
        return QuadResult {
            value: f64::NAN,
            error: f64::INFINITY,
            nodes: 0,
            converged: false,
        };
    }
    let step = 2.0 * std::f64::consts::PI * temperature;
    let mut sum = 0.5 * f(0.0);
    let mut small_run = 0;
    let mut prev = f64::NAN;
    let mut last = sum;
    let mut n = 0;
    while n < MAX_TERMS {
        n += 1;
        let term = f(step * n as f64);
        sum += term;
        prev = last;
        last = term;
        let threshold = (spec.rel_tol * sum.abs()).max(spec.abs_floor);
        let r = if prev != 0.0 { last / prev } else { 0.0 };
        let tail_est = if r > 0.0 && r < 1.0 { term.abs() / (1.0 - r) } else { term.abs() };
        if tail_est < threshold || term == 0.0 {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 3 {
            break;
        }
    }
    let ratio = if prev != 0.0 { last / prev } else { 0.0 };
    let tail = if ratio > 0.0 && ratio < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        0.0
    };
    let scale = 2.0 * temperature;
    let value = scale * (sum + tail);
    let error = scale * (tail.abs() + 8.0 * f64::EPSILON * sum.abs());
    let converged = n < MAX_TERMS
        && value.is_finite()
        && error <= (spec.rel_tol * value.abs()).max(scale * spec.abs_floor).max(f64::MIN_POSITIVE);
    QuadResult {
        value,
        error,
        nodes: n + 1,
        converged: converged || (value == 0.0 && error == 0.0),
    }
}

/// Root of `f` in [a, b] by Brent's method; `f(a)` and `f(b)` must differ in sign.
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b);
    }
    None
}

//! Odd attractor profiles, the Lyapunov functional and the distance law.
//!
//! An admissible profile `H` is odd, 2π-periodic and strictly increasing on
//! `(0, π)` with slope at least `m > 0`. It necessarily jumps at `0`, at `±π`,
//! or at both. On the torus `⟨H, u u_x⟩ ≤ -(m/2)‖u‖²`, with equality for
//! `H = rF` where `F(x) = x - π` on `(0, π)`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::nonlinear_direct_into;
use crate::error::{Error, Result};
use crate::inviscid::Characteristics;
use crate::numerics::golden_section_min;
use crate::quadrature::{even_torus_integral, gauss_legendre, simpson};
use crate::spectral::SineSpectrum;

/// `‖F‖² = 2π³/3`.
pub const F_L2_NORM_SQ: f64 = 2.0 * PI * PI * PI / 3.0;
/// Oddness tolerance of [`validate_h`].
pub const ODD_CHECK_TOLERANCE: f64 = 1e-12;
/// Interior samples used by [`validate_h`].
pub const VALIDATION_SAMPLES: usize = 4096;
/// Sampled slope floors at or below this are treated as zero.
pub const MIN_SLOPE_FLOOR: f64 = 1e-10;
const CUSTOM_TAIL_START: usize = 2048;

/// A 2π-periodic odd profile known pointwise.
pub trait OddProfile {
    fn value(&self, x: f64) -> f64;
    /// Classical derivative away from the jumps.
    fn derivative(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttractorKind {
    #[serde(rename = "F")]
    F,
    #[serde(rename = "Phi")]
    Phi,
    #[serde(rename = "sawtooth")]
    Sawtooth,
    #[serde(rename = "custom")]
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpLocation {
    Origin,
    Pi,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// `x - π`
    Origin,
    /// `x`
    Pi,
    /// `Σ c_k x^k`
    Polynomial(Vec<f64>),
}

impl Shape {
    fn g(&self, x: f64) -> f64 {
        match self {
            Shape::Origin => x - PI,
            Shape::Pi => x,
            Shape::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ck| acc * x + ck),
        }
    }

    fn dg(&self, x: f64) -> f64 {
        match self {
            Shape::Origin | Shape::Pi => 1.0,
            Shape::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, ck)| acc * x + k as f64 * ck),
        }
    }
}

/// `x` reduced to `(-π, π]`.
fn reduce(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Lower bound on `H'` over `(0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFloor {
    pub m: f64,
    pub at: f64,
    /// `true` when found by sampling rather than in closed form.
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorFn {
    kind: AttractorKind,
    shape: Shape,
    scale: f64,
    slope_floor: f64,
    l2_norm: f64,
}

impl OddProfile for AttractorFn {
    fn value(&self, x: f64) -> f64 {
        let y = reduce(x);
        if y == 0.0 || y == PI {
            return 0.0;
        }
        y.signum() * self.scale * self.shape.g(y.abs())
    }

    fn derivative(&self, x: f64) -> f64 {
        self.scale * self.shape.dg(reduce(x).abs())
    }
}

/// `F(x) = x - π` on `(0, π)`, jumping at the origin.
pub fn make_f() -> AttractorFn {
    AttractorFn {
        kind: AttractorKind::F,
        shape: Shape::Origin,
        scale: 1.0,
        slope_floor: 1.0,
        l2_norm: F_L2_NORM_SQ.sqrt(),
    }
}

/// `F / ‖F‖`.
pub fn make_phi() -> AttractorFn {
    let s = 1.0 / F_L2_NORM_SQ.sqrt();
    AttractorFn { kind: AttractorKind::Phi, shape: Shape::Origin, scale: s, slope_floor: s, l2_norm: 1.0 }
}

/// `x` on `(-π, π)`, jumping at `±π`.
pub fn make_sawtooth() -> AttractorFn {
    AttractorFn {
        kind: AttractorKind::Sawtooth,
        shape: Shape::Pi,
        scale: 1.0,
        slope_floor: 1.0,
        l2_norm: F_L2_NORM_SQ.sqrt(),
    }
}

/// Odd extension of the polynomial `g(x) = Σ c_k x^k` given on `(0, π)`.
pub fn make_custom(poly: Vec<f64>) -> Result<AttractorFn> {
    if poly.is_empty() || poly.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidAttractor("polynomial coefficients must be finite and non-empty".into()));
    }
    let shape = Shape::Polynomial(poly);
    let l2_sq = 2.0 * gauss_legendre(0.0, PI, 256, |x| shape.g(x).powi(2));
    let mut h = AttractorFn { kind: AttractorKind::Custom, shape, scale: 1.0, slope_floor: 0.0, l2_norm: l2_sq.sqrt() };
    h.slope_floor = validate_h(&h)?.m;
    Ok(h)
}

/// On-disk description of a profile: `{"kind": "custom", "poly": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorFile {
    pub kind: AttractorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl AttractorFile {
    pub fn build(&self) -> Result<AttractorFn> {
        let base = match self.kind {
            AttractorKind::F => make_f(),
            AttractorKind::Phi => make_phi(),
            AttractorKind::Sawtooth => make_sawtooth(),
            AttractorKind::Custom => {
                let poly = self
                    .poly
                    .clone()
                    .ok_or_else(|| Error::InvalidAttractor("custom profile needs \"poly\"".into()))?;
                make_custom(poly)?
            }
        };
        match self.scale {
            Some(c) => base.scaled(c),
            None => Ok(base),
        }
    }
}

pub fn read_attractor(path: &Path) -> Result<AttractorFn> {
    let text = std::fs::read_to_string(path)?;
    let file: AttractorFile = serde_json::from_str(&text)?;
    file.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaNorm {
    pub alpha: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorDescriptor {
    pub kind: AttractorKind,
    pub m: f64,
    pub l2_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_norm: Option<AlphaNorm>,
}

impl AttractorFn {
    pub fn kind(&self) -> AttractorKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `m = inf H'` on `(0, π)`.
    pub fn slope_floor(&self) -> f64 {
        self.slope_floor
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm * self.l2_norm
    }

    pub fn jump_location(&self) -> JumpLocation {
        let at_origin = self.shape.g(0.0) != 0.0;
        let at_pi = self.shape.g(PI) != 0.0;
        match (at_origin, at_pi) {
            (true, true) => JumpLocation::Both,
            (false, true) => JumpLocation::Pi,
            _ => JumpLocation::Origin,
        }
    }

    /// `c H` for `c > 0`. Only `F` scaled by `1/‖F‖` keeps a named kind.
    pub fn scaled(&self, c: f64) -> Result<AttractorFn> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidAttractor(format!("scale {c} must be positive")));
        }
        let mut h = self.clone();
        h.scale *= c;
        h.slope_floor *= c;
        h.l2_norm *= c;
        if c != 1.0 {
            h.kind = AttractorKind::Custom;
        }
        Ok(h)
    }

    /// Sine coefficient `φ_n` in `H = -2 Σ φ_n sin(n x)`.
    pub fn sine_coeff(&self, n: usize) -> f64 {
        let nf = n as f64;
        match &self.shape {
            Shape::Origin => self.scale / nf,
            Shape::Pi => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                self.scale * sign / nf
            }
            Shape::Polynomial(_) => {
                let panels = 64 + 2 * n;
                -self.scale / PI * gauss_legendre(0.0, PI, panels, |x| self.shape.g(x) * (nf * x).sin())
            }
        }
    }

    pub fn sine_coeffs(&self, modes: usize) -> Vec<f64> {
        (1..=modes).map(|n| self.sine_coeff(n)).collect()
    }

    /// `‖H‖²_{Ḣᵅ} = 4π Σ n^{2α} φ_n²`, finite for `α < 1/2`.
    pub fn hs_norm_sq(&self, alpha: f64) -> Result<f64> {
        match &self.shape {
            Shape::Origin | Shape::Pi => Ok(self.scale * self.scale * 4.0 * PI * series_sum(alpha, 1e-14)?),
            Shape::Polynomial(_) => {
                check_alpha(alpha)?;
                let n0 = CUSTOM_TAIL_START;
                let head: f64 = (1..=n0).rev().map(|n| (n as f64).powf(2.0 * alpha) * self.sine_coeff(n).powi(2)).sum();
                // φ_n ≈ ±(a ± b)/(nπ) with the jumps a = g(0+), b = g(π-)
                let a = self.scale * self.shape.g(0.0);
                let b = self.scale * self.shape.g(PI);
                let mean_sq = (a * a + b * b) / (PI * PI);
                let tail = mean_sq * (n0 as f64).powf(2.0 * alpha - 1.0) / (1.0 - 2.0 * alpha);
                Ok(4.0 * PI * (head + tail))
            }
        }
    }

    pub fn descriptor(&self, alpha: Option<f64>) -> Result<AttractorDescriptor> {
        let alpha_norm = match alpha {
            Some(a) => Some(AlphaNorm { alpha: a, value: self.hs_norm_sq(a)?.sqrt() }),
            None => None,
        };
        Ok(AttractorDescriptor { kind: self.kind, m: self.slope_floor, l2_norm: self.l2_norm, alpha_norm })
    }
}

/// Checks oddness and positivity of `H'` on `(0, π)` by dense sampling.
pub fn validate_h<P: OddProfile + ?Sized>(h: &P) -> Result<SlopeFloor> {
    let n = VALIDATION_SAMPLES;
    let dx = PI / n as f64;
    let (mut best, mut best_x) = (f64::INFINITY, 0.0);
    for i in 0..n {
        let x = (i as f64 + 0.5) * dx;
        let (hp, hm) = (h.value(x), h.value(-x));
        if !hp.is_finite() || !hm.is_finite() {
            return Err(Error::InvalidAttractor(format!("non-finite value at x = {x}")));
        }
        if (hp + hm).abs() > ODD_CHECK_TOLERANCE * hp.abs().max(1.0) {
            return Err(Error::InvalidAttractor(format!("not odd at x = {x}: H(x) + H(-x) = {}", hp + hm)));
        }
        let d = h.derivative(x);
        if d < best {
            best = d;
            best_x = x;
        }
    }
    let lo = (best_x - dx).max(0.0);
    let hi = (best_x + dx).min(PI);
    let (x, v) = golden_section_min(|x| h.derivative(x), lo, hi, 1e-12);
    let (m, at) = if v < best { (v, x) } else { (best, best_x) };
    if !(m > MIN_SLOPE_FLOOR) {
        return Err(Error::InvalidAttractor(format!("slope floor {m} at x = {at} is not positive")));
    }
    Ok(SlopeFloor { m, at, sampled: true })
}

/// `L(u) = ⟨u, F⟩ = 4π Σ ψ_n / n`.
pub fn lyapunov(spec: &SineSpectrum) -> f64 {
    4.0 * PI * spec.coeffs().iter().enumerate().map(|(i, v)| v / (i + 1) as f64).sum::<f64>()
}

/// `⟨u, H⟩ = 4π Σ ψ_n φ_n`.
pub fn lyapunov_with(spec: &SineSpectrum, h: &AttractorFn) -> f64 {
    4.0 * PI * spec.coeffs().iter().enumerate().map(|(i, v)| v * h.sine_coeff(i + 1)).sum::<f64>()
}

/// `⟨u, H⟩` by Gauss–Legendre on the half period.
pub fn lyapunov_quadrature(spec: &SineSpectrum, h: &AttractorFn, panels: usize) -> f64 {
    even_torus_integral(panels, |x| spec.eval(x) * h.value(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyIdentityResidual {
    /// Exact Galerkin evaluation on the zero-padded spectrum.
    pub spectral: f64,
    /// Physical-space quadrature.
    pub quadrature: f64,
}

/// Residual of `⟨F, u u_x⟩ + ½‖u‖² = 0` by two independent routes.
pub fn key_identity_residual(spec: &SineSpectrum) -> Result<KeyIdentityResidual> {
    let n = spec.modes();
    let padded = spec.resized(2 * n)?;
    let mut nl = vec![0.0; 2 * n];
    nonlinear_direct_into(padded.coeffs(), &mut nl);
    let pairing = -4.0 * PI * nl.iter().enumerate().map(|(i, v)| v / (i + 1) as f64).sum::<f64>();
    let spectral = pairing + 0.5 * spec.energy();

    let m = (8 * n).max(4096).next_power_of_two();
    let panels = m / 2;
    let f = make_f();
    let pairing_q = even_torus_integral(panels, |x| f.value(x) * spec.eval(x) * spec.eval_derivative(x));
    let energy_q = even_torus_integral(panels, |x| spec.eval(x).powi(2));
    Ok(KeyIdentityResidual { spectral, quadrature: pairing_q + 0.5 * energy_q })
}

/// `‖u - rF‖² = ‖u‖² - 2r⟨u, F⟩ + r²‖F‖²`.
pub fn attractor_distance(spec: &SineSpectrum, r: f64) -> f64 {
    spec.energy() - 2.0 * r * lyapunov(spec) + r * r * F_L2_NORM_SQ
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalScaling {
    pub r0: f64,
    /// `‖u⁰ - r₀F‖² / (r₀ ‖u⁰‖²)`, the distance decay time at `r₀`.
    pub g_r0: f64,
}

/// Minimizer `r₀ = ‖u⁰‖/‖F‖` of `r ↦ ‖u⁰ - rF‖² / (r‖u⁰‖²)`.
pub fn optimal_r(u0: &SineSpectrum) -> Result<OptimalScaling> {
    let e = u0.energy();
    if !(e > 0.0) {
        return Err(Error::ZeroData);
    }
    let g = |r: f64| attractor_distance(u0, r) / (r * e);
    let r0 = (e / F_L2_NORM_SQ).sqrt();
    let g0 = g(r0);
    let samples = 401;
    for i in 0..samples {
        let r = r0 * 10f64.powf(-1.0 + 2.0 * i as f64 / (samples - 1) as f64);
        if g(r) < g0 - 1e-12 * g0.abs().max(1.0) {
            return Err(Error::Invariant(format!("r = {r} beats the closed-form minimizer")));
        }
    }
    Ok(OptimalScaling { r0, g_r0: g0 })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecayTarget {
    /// `rF`, for which the decay law is an identity.
    ScaledF(f64),
    /// A general admissible profile, for which it is an upper bound.
    Profile(AttractorFn),
}

impl DecayTarget {
    fn l2_norm_sq(&self) -> f64 {
        match self {
            DecayTarget::ScaledF(r) => r * r * F_L2_NORM_SQ,
            DecayTarget::Profile(h) => h.l2_norm_sq(),
        }
    }

    fn value(&self, x: f64) -> f64 {
        match self {
            DecayTarget::ScaledF(r) => r * make_f().value(x),
            DecayTarget::Profile(h) => h.value(x),
        }
    }

    fn slope(&self) -> f64 {
        match self {
            DecayTarget::ScaledF(r) => *r,
            DecayTarget::Profile(h) => h.slope_floor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub distance: f64,
    /// `D(0) - m ‖u⁰‖² t`.
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub tmax: f64,
    pub d0: f64,
    pub initial_energy: f64,
    pub slope: f64,
    /// `true` when `predicted` is an identity rather than a bound.
    pub exact: bool,
    pub rows: Vec<DecayRow>,
}

impl DecaySeries {
    /// Time at which the predicted law reaches zero.
    pub fn predicted_zero(&self) -> f64 {
        self.d0 / (self.slope * self.initial_energy)
    }
}

/// `‖u(t) - H‖²` along the inviscid flow, from characteristic samples on `m` points.
pub fn attractor_decay_series(
    ch: &Characteristics,
    target: &DecayTarget,
    times: &[f64],
    m: usize,
) -> Result<DecaySeries> {
    let h_sq = target.l2_norm_sq();
    let distance_at = |t: f64| -> Result<(f64, f64)> {
        let grid = ch.sample(t, m)?;
        let e = grid.l2_norm_sq();
        let half = grid.half_period();
        let dx = PI / (m / 2) as f64;
        let prod: Vec<f64> = half.iter().enumerate().map(|(i, u)| u * target.value(i as f64 * dx)).collect();
        let pairing = 2.0 * simpson(&prod, dx);
        Ok((e - 2.0 * pairing + h_sq, e))
    };
    let (d0, e0) = distance_at(0.0)?;
    let slope = target.slope();
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let (d, _) = distance_at(t)?;
        let predicted = d0 - slope * e0 * t;
        rows.push(DecayRow { t, distance: d, predicted, residual: d - predicted });
    }
    Ok(DecaySeries {
        tmax: ch.tmax(),
        d0,
        initial_energy: e0,
        slope,
        exact: matches!(target, DecayTarget::ScaledF(_)),
        rows,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha >= 0.5 {
        return Err(Error::DivergentSeries { alpha });
    }
    if alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be non-negative")));
    }
    Ok(())
}

/// `Σ_{n≥1} n^{-2(1-α)}` for `0 ≤ α < 1/2`.
///
/// Direct summation up to `N₀` plus the Euler–Maclaurin tail through the
/// fifth derivative. `N₀` doubles until the first omitted correction is below
/// `tol`.
pub fn series_sum(alpha: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let p = 2.0 - 2.0 * alpha;
    let mut n0: usize = 16;
    loop {
        let x = n0 as f64;
        let rising = |k: usize| (0..k).map(|i| p + i as f64).product::<f64>();
        let omitted = rising(7) / (30.0 * 40320.0) * x.powf(-p - 7.0);
        if omitted < 0.1 * tol || n0 >= 1 << 20 {
            let head: f64 = (1..=n0).rev().map(|n| (n as f64).powf(-p)).sum();
            let tail = x.powf(1.0 - p) / (p - 1.0) - 0.5 * x.powf(-p) + p / 12.0 * x.powf(-p - 1.0)
                - rising(3) / 720.0 * x.powf(-p - 3.0)
                + rising(5) / 30240.0 * x.powf(-p - 5.0);
            return Ok(head + tail);
        }
        n0 *= 2;
    }
}

/// `C_α = ‖F‖_{Ḣᵅ} / √2 = (2π Σ n^{-2(1-α)})^{1/2}`.
pub fn c_alpha(alpha: f64, tol: f64) -> Result<f64> {
    Ok((2.0 * PI * series_sum(alpha, tol)?).sqrt())
}

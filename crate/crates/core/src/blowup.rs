//! Blowup certificates for the supercritical regime `α < 1/2`, the comparison
//! ODE behind them, and resolution-loss detection on simulated records.
//!
//! Along a smooth solution the Lyapunov functional `L = ⟨u, F⟩` obeys
//! `L' ≥ -M' + κ L²` with `∫₀ᵗ M' ≤ M √t`, which forces `L` to blow up once
//! `L₀` is large compared with the dissipation budget.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::attractors::{c_alpha, lyapunov, lyapunov_with, AttractorFn, F_L2_NORM_SQ};
use crate::dynamics::{DetectionPolicy, ModelParams, PseudoSpectral, SimulationRecord};
use crate::error::{Error, Result};
use crate::numerics::Dopri5;
use crate::spectral::{sobolev_norm, SineSpectrum};

/// Tolerance used for `C_α` inside certificates.
pub const C_ALPHA_TOLERANCE: f64 = 1e-13;
/// `κ = 3 / (4π³)`, the Riccati coefficient for `F`.
pub const KAPPA_F: f64 = 3.0 / (4.0 * PI * PI * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    SupercriticalF,
    SineCorollary,
    GeneralH,
}

/// Parameters of the lower curve `(3/y₀ - κt)⁻¹` and its window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCurve {
    pub y0: f64,
    pub kappa: f64,
    /// `M` in `∫₀ᵗ (dissipative loss) ≤ M √t`.
    pub m: f64,
    #[serde(with = "nullable")]
    pub window: f64,
}

impl LowerBoundCurve {
    pub fn eval(&self, t: f64) -> f64 {
        1.0 / (3.0 / self.y0 - self.kappa * t)
    }

    pub fn horizon(&self) -> f64 {
        3.0 / (self.kappa * self.y0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupCertificate {
    pub theorem: Theorem,
    pub hypotheses_hold: bool,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub threshold: f64,
    /// `L₀³ / threshold`; `null` in JSON when the threshold vanishes.
    #[serde(with = "nullable")]
    pub margin: f64,
    #[serde(rename = "predicted_bound_T")]
    pub predicted_bound_t: Option<f64>,
    /// Validity window `L₀² / (4M²)` of the lower curve.
    #[serde(with = "nullable")]
    pub window: f64,
    pub lower_bound_curve: LowerBoundCurve,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl BlowupCertificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Non-finite floats as JSON `null`.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

fn require_supercritical(p: &ModelParams) -> Result<()> {
    if p.alpha >= 0.5 {
        return Err(Error::UnsupportedRegime { alpha: p.alpha });
    }
    Ok(())
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num > 0.0 {
            f64::INFINITY
        } else if num < 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        }
    } else {
        num / den
    }
}

struct Ingredients {
    theorem: Theorem,
    l0: f64,
    threshold: f64,
    bound_numerator: f64,
    kappa: f64,
    m: f64,
}

fn assemble(ing: Ingredients) -> BlowupCertificate {
    let Ingredients { theorem, l0, threshold, bound_numerator, kappa, m } = ing;
    let margin = ratio(l0.powi(3), threshold);
    let sign_ok = l0 > 0.0;
    let hypotheses_hold = sign_ok && l0.powi(3) > threshold;
    let window = ratio(l0 * l0, 4.0 * m * m).abs();
    let diagnostic = if !sign_ok {
        Some(format!("sign condition failed: L0 = {l0} is not positive"))
    } else if !hypotheses_hold {
        Some(format!("L0^3 = {} does not exceed the threshold {threshold}", l0.powi(3)))
    } else {
        None
    };
    BlowupCertificate {
        theorem,
        hypotheses_hold,
        l0,
        threshold,
        margin,
        predicted_bound_t: hypotheses_hold.then(|| bound_numerator / l0),
        window,
        lower_bound_curve: LowerBoundCurve { y0: l0, kappa, m, window },
        diagnostic,
    }
}

/// Certificate for `H = F`: `L₀³ > 16π³ C_α² ‖u⁰‖² ν` implies blowup before `4π³/L₀`.
pub fn certify_blowup_f(u0: &SineSpectrum, p: &ModelParams) -> Result<BlowupCertificate> {
    require_supercritical(p)?;
    let c = c_alpha(p.alpha, C_ALPHA_TOLERANCE)?;
    let e = u0.energy();
    Ok(assemble(Ingredients {
        theorem: Theorem::SupercriticalF,
        l0: lyapunov(u0),
        threshold: 16.0 * PI.powi(3) * c * c * e * p.nu,
        bound_numerator: 4.0 * PI.powi(3),
        kappa: KAPPA_F,
        m: c * p.nu.sqrt() * e.sqrt(),
    }))
}

/// Certificate for a general admissible profile `H` with slope floor `m`.
pub fn certify_blowup_h(u0: &SineSpectrum, h: &AttractorFn, p: &ModelParams) -> Result<BlowupCertificate> {
    require_supercritical(p)?;
    let slope = h.slope_floor();
    if !(slope > 0.0) {
        return Err(Error::InvalidAttractor(format!("slope floor {slope} is not positive")));
    }
    let hs = h.hs_norm_sq(p.alpha)?;
    let h_sq = h.l2_norm_sq();
    let e = u0.energy();
    Ok(assemble(Ingredients {
        theorem: Theorem::GeneralH,
        l0: lyapunov_with(u0, h),
        threshold: 12.0 / slope * hs * h_sq * e * p.nu,
        bound_numerator: 6.0 * h_sq / slope,
        kappa: slope / (2.0 * h_sq),
        m: (0.5 * p.nu * hs * e).sqrt(),
    }))
}

/// Sine data `u⁰ = -R sin x`: blowup before `2π²/R` when `R/ν > 4π C_α²`.
///
/// The threshold field is scaled so that `margin = R / (4π C_α² ν)`.
pub fn corollary_condition(amplitude: f64, p: &ModelParams) -> Result<BlowupCertificate> {
    require_supercritical(p)?;
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("amplitude {amplitude} must be positive")));
    }
    let c = c_alpha(p.alpha, C_ALPHA_TOLERANCE)?;
    let e = PI * amplitude * amplitude;
    let l0 = 2.0 * PI * amplitude;
    Ok(assemble(Ingredients {
        theorem: Theorem::SineCorollary,
        l0,
        threshold: 32.0 * PI.powi(3) * c * c * e * p.nu,
        bound_numerator: 4.0 * PI.powi(3),
        kappa: KAPPA_F,
        m: c * p.nu.sqrt() * e.sqrt(),
    }))
}

/// `R/ν` above which [`corollary_condition`] certifies blowup.
pub fn corollary_threshold(alpha: f64) -> Result<f64> {
    let c = c_alpha(alpha, C_ALPHA_TOLERANCE)?;
    Ok(4.0 * PI * c * c)
}

/// `(1/y₀ - κt + M√t / (y₀ - M√t)²)⁻¹`, or `+∞` once the bracket is non-positive.
pub fn comparison_lower_bound(y0: f64, kappa: f64, m: f64, t: f64) -> Result<f64> {
    let window = comparison_window(y0, m);
    if !(t >= 0.0) || t >= window {
        return Err(Error::OutsideValidity { t, window });
    }
    let ms = m * t.sqrt();
    let bracket = 1.0 / y0 - kappa * t + ms / (y0 - ms).powi(2);
    Ok(if bracket > 0.0 { 1.0 / bracket } else { f64::INFINITY })
}

/// `y₀² / M²`.
pub fn comparison_window(y0: f64, m: f64) -> f64 {
    if m == 0.0 {
        f64::INFINITY
    } else {
        (y0 / m).powi(2)
    }
}

/// `min(y₀²/(4M²), 3/(κy₀))`.
pub fn simplified_window(y0: f64, kappa: f64, m: f64) -> f64 {
    let w = if m == 0.0 { f64::INFINITY } else { y0 * y0 / (4.0 * m * m) };
    w.min(simplified_horizon(y0, kappa))
}

pub fn simplified_horizon(y0: f64, kappa: f64) -> f64 {
    3.0 / (kappa * y0)
}

/// `(3/y₀ - κt)⁻¹`, valid when `y₀³ ≥ 12M²/κ`.
pub fn simplified_lower_bound(y0: f64, kappa: f64, m: f64, t: f64) -> Result<f64> {
    if y0.powi(3) < 12.0 * m * m / kappa {
        return Err(Error::HypothesisViolated(format!(
            "y0^3 = {} is below 12 M^2 / kappa = {}",
            y0.powi(3),
            12.0 * m * m / kappa
        )));
    }
    let window = simplified_window(y0, kappa, m);
    if !(t >= 0.0) || t >= window {
        return Err(Error::OutsideValidity { t, window });
    }
    Ok(1.0 / (3.0 / y0 - kappa * t))
}

/// Forcing in `y' = -f(t) + κy²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForcingShape {
    Zero,
    /// `f(t) = M / (2√(t + ε))`, so that `∫₀ᵗ f ≈ M√t`.
    Saturating { eps: f64 },
}

impl ForcingShape {
    pub fn saturating() -> Self {
        ForcingShape::Saturating { eps: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledCheck {
    pub samples: usize,
    pub t_last: f64,
    /// `min (y - bound)` over the samples.
    pub worst_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub blowup_time: f64,
    pub comparison: SampledCheck,
    pub simplified: std::result::Result<SampledCheck, Error>,
    /// Maximum deviation from `y₀/(1 - κy₀t)` when the forcing vanishes.
    pub riccati_error: Option<f64>,
}

impl ComparisonReport {
    /// All available checks hold within `slack`.
    pub fn holds(&self, slack: f64) -> bool {
        let simplified_ok = match &self.simplified {
            Ok(c) => c.worst_slack >= -slack,
            Err(_) => true,
        };
        self.comparison.worst_slack >= -slack && simplified_ok && self.riccati_error.map_or(true, |e| e <= slack)
    }
}

pub const COMPARISON_SAMPLES: usize = 100;
const BLOWUP_W: f64 = 1e-6;

/// Solution of `y' = -f + κy²`, integrated as `w = 1/y` in `s = √t`.
struct ComparisonOde {
    kappa: f64,
    m: f64,
    shape: ForcingShape,
    y0: f64,
}

impl ComparisonOde {
    fn rhs(&self, s: f64, w: f64) -> f64 {
        let two_s_f = match self.shape {
            ForcingShape::Zero => 0.0,
            ForcingShape::Saturating { eps } => self.m * s / (s * s + eps).sqrt(),
        };
        two_s_f * w * w - 2.0 * s * self.kappa
    }

    /// `y` at the increasing times `ts`.
    fn solve(&self, ts: &[f64]) -> Result<Vec<f64>> {
        let solver = Dopri5::default();
        let (mut s, mut w) = (0.0, 1.0 / self.y0);
        let mut out = Vec::with_capacity(ts.len());
        for &t in ts {
            let target = t.sqrt();
            w = solver.integrate(|s, w| self.rhs(s, w), s, w, target)?;
            s = target;
            out.push(1.0 / w);
        }
        Ok(out)
    }

    /// First time at which `w` falls below `BLOWUP_W`, searched up to `limit`.
    fn blowup_time(&self, limit: f64) -> f64 {
        let solver = Dopri5::default();
        let chunks = 4000;
        let smax = limit.sqrt();
        let (mut s, mut w) = (0.0, 1.0 / self.y0);
        for i in 1..=chunks {
            let next = smax * i as f64 / chunks as f64;
            match solver.integrate(|s, w| self.rhs(s, w), s, w, next) {
                Ok(v) if v.is_finite() && v > BLOWUP_W => {
                    s = next;
                    w = v;
                }
                _ => {
                    let (mut lo, mut hi) = (s, next);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        match solver.integrate(|s, w| self.rhs(s, w), s, w, mid) {
                            Ok(v) if v.is_finite() && v > BLOWUP_W => lo = mid,
                            _ => hi = mid,
                        }
                    }
                    return lo * lo;
                }
            }
        }
        f64::INFINITY
    }
}

fn sample_times(end: f64) -> Vec<f64> {
    (1..=COMPARISON_SAMPLES).map(|i| end * i as f64 / COMPARISON_SAMPLES as f64).collect()
}

/// Integrates the comparison ODE and checks both lower bounds at sampled times.
pub fn verify_comparison_lemma(y0: f64, kappa: f64, m: f64, shape: ForcingShape) -> Result<ComparisonReport> {
    if !(y0 > 0.0 && kappa > 0.0 && m >= 0.0) {
        return Err(Error::InvalidParameter("need y0 > 0, kappa > 0, M >= 0".into()));
    }
    let ode = ComparisonOde { kappa, m, shape, y0 };
    let m_eff = if shape == ForcingShape::Zero { 0.0 } else { m };
    let search = comparison_window(y0, m_eff).min(10.0 / (kappa * y0));
    let blowup_time = ode.blowup_time(search);
    let cap = 0.9 * blowup_time;

    let window = comparison_window(y0, m_eff);
    let end = (window * (1.0 - 1e-9)).min(cap).min(search);
    let ts = sample_times(end);
    let ys = ode.solve(&ts)?;
    let mut worst = f64::INFINITY;
    for (&t, &y) in ts.iter().zip(&ys) {
        worst = worst.min(y - comparison_lower_bound(y0, kappa, m_eff, t)?);
    }
    let comparison = SampledCheck { samples: ts.len(), t_last: end, worst_slack: worst };

    let simplified = match simplified_lower_bound(y0, kappa, m_eff, 0.0) {
        Err(e) => Err(e),
        Ok(_) => {
            let end = (simplified_window(y0, kappa, m_eff) * (1.0 - 1e-9)).min(cap);
            let ts = sample_times(end);
            let ys = ode.solve(&ts)?;
            let mut worst = f64::INFINITY;
            for (&t, &y) in ts.iter().zip(&ys) {
                worst = worst.min(y - simplified_lower_bound(y0, kappa, m_eff, t)?);
            }
            Ok(SampledCheck { samples: ts.len(), t_last: end, worst_slack: worst })
        }
    };

    let riccati_error = (m_eff == 0.0).then(|| {
        ts.iter().zip(&ys).map(|(&t, &y)| (y - y0 / (1.0 - kappa * y0 * t)).abs()).fold(0.0, f64::max)
    });
    Ok(ComparisonReport { blowup_time, comparison, simplified, riccati_error })
}

/// Earliest recorded time at which the resolution-loss proxy fires.
///
/// This flags loss of resolution, not a proof of blowup.
pub fn detect_numerical_blowup(record: &SimulationRecord, policy: &DetectionPolicy) -> Option<f64> {
    let h1_initial = record.rows.first()?.h1_norm;
    record
        .rows
        .iter()
        .find(|r| policy.triggered(r.tail_fraction, r.h1_norm, h1_initial))
        .map(|r| r.t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovMonitor {
    /// `dL/dt - (-√2 C_α ν ‖u‖_{Ḣᵅ} + κ L²)` per stored spectrum.
    pub slacks: Vec<f64>,
    pub worst_slack: f64,
    /// Largest `|dL/dt - (-ν⟨Λᵅu, ΛᵅF⟩ + ½‖u‖²)|`, nonzero only through truncation.
    pub worst_identity_error: f64,
}

/// Checks the Lyapunov differential inequality at every stored spectrum.
pub fn monitor_lyapunov_bound(spectra: &[SineSpectrum], p: &ModelParams) -> Result<LyapunovMonitor> {
    let c = if p.nu == 0.0 { 0.0 } else { c_alpha(p.alpha.min(0.5 - 1e-9), C_ALPHA_TOLERANCE)? };
    let mut slacks = Vec::with_capacity(spectra.len());
    let mut worst_identity: f64 = 0.0;
    let mut kernel: Option<PseudoSpectral> = None;
    for spec in spectra {
        let n = spec.modes();
        if kernel.as_ref().map_or(true, |k| k.modes() != n) {
            kernel = Some(PseudoSpectral::new(n)?);
        }
        let rhs = kernel.as_ref().expect("kernel").rhs(spec, p);
        let dl = lyapunov(&rhs);
        let pairing = 4.0
            * PI
            * spec.coeffs().iter().enumerate().map(|(i, v)| ((i + 1) as f64).powf(2.0 * p.alpha) * v / (i + 1) as f64).sum::<f64>();
        let energy = spec.energy();
        worst_identity = worst_identity.max((dl - (-p.nu * pairing + 0.5 * energy)).abs());
        let l = lyapunov(spec);
        let lower = -(2f64).sqrt() * c * p.nu * sobolev_norm(spec, p.alpha) + KAPPA_F * l * l;
        slacks.push(dl - lower);
    }
    let worst_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(LyapunovMonitor { slacks, worst_slack, worst_identity_error: worst_identity })
}

/// `√(2π³/3) ‖u⁰‖`, the Cauchy–Schwarz ceiling on `L`.
pub fn lyapunov_ceiling(initial_energy: f64) -> f64 {
    (F_L2_NORM_SQ * initial_energy).sqrt()
}

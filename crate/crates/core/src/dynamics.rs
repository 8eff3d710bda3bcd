//! The sine-Galerkin fractal Burgers system
//!
//! ```text
//! dψ_n/dt = -ν n^{2α} ψ_n + (n/2) Σ_{j=1}^{n-1} ψ_j ψ_{n-j} - n Σ_{k=1}^{N-n} ψ_k ψ_{k+n}
//! ```
//!
//! evaluated either by direct O(N²) convolution sums or pseudospectrally, and
//! marched with an integrating-factor RK4 scheme.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attractors;
use crate::error::{Error, Result};
use crate::spectral::{SineSpectrum, SineTransform};

/// Fractional dissipation exponent and viscosity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub nu: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, nu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1]")));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu = {nu} must be finite and non-negative")));
        }
        Ok(ModelParams { alpha, nu })
    }

    pub fn inviscid() -> Self {
        ModelParams { alpha: 1.0, nu: 0.0 }
    }

    pub fn is_inviscid(&self) -> bool {
        self.nu == 0.0
    }

    /// `ν n^{2α}` for 1-based `n`.
    pub fn damping(&self, n: usize) -> f64 {
        self.nu * (n as f64).powf(2.0 * self.alpha)
    }
}

/// Adds the Galerkin nonlinearity of `psi` into `out`.
///
/// Both sums run sequentially in increasing index order.
pub fn nonlinear_direct_into(psi: &[f64], out: &mut [f64]) {
    let n_modes = psi.len();
    for n in 1..=n_modes {
        let mut forward = 0.0;
        for j in 1..n {
            forward += psi[j - 1] * psi[n - j - 1];
        }
        let mut backward = 0.0;
        for k in 1..=(n_modes - n) {
            backward += psi[k - 1] * psi[k + n - 1];
        }
        let nf = n as f64;
        out[n - 1] += 0.5 * nf * forward - nf * backward;
    }
}

/// Right-hand side by direct convolution sums.
pub fn rhs_direct(spec: &SineSpectrum, p: &ModelParams) -> SineSpectrum {
    let psi = spec.coeffs();
    let mut out: Vec<f64> = psi.iter().enumerate().map(|(i, v)| -p.damping(i + 1) * v).collect();
    nonlinear_direct_into(psi, &mut out);
    SineSpectrum::new(out).expect("finite input gives finite output")
}

/// Smallest power of two strictly above `3N`, so products of modes up to `N`
/// alias only onto modes above `N`.
pub fn dealiased_grid_size(modes: usize) -> usize {
    (3 * modes + 1).next_power_of_two().max(4)
}

/// Pseudospectral evaluator of `-∂ₓ(u²/2)` with 3/2-rule padding.
#[derive(Debug, Clone)]
pub struct PseudoSpectral {
    modes: usize,
    transform: SineTransform,
}

impl PseudoSpectral {
    pub fn new(modes: usize) -> Result<Self> {
        Ok(PseudoSpectral { modes, transform: SineTransform::new(dealiased_grid_size(modes))? })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid_size(&self) -> usize {
        self.transform.grid_size()
    }

    /// Adds the nonlinearity into `out`.
    pub fn nonlinear_into(&self, psi: &[f64], out: &mut [f64]) {
        debug_assert_eq!(psi.len(), self.modes);
        let mut u = self.transform.synthesize(psi);
        for v in u.iter_mut() {
            *v *= *v;
        }
        // u² = Σ ŵ_k e^{ikx} with ŵ real; -∂ₓ(u²/2) = Σ k ŵ_k sin(kx)
        let w = self.transform.forward_coefficients(&u);
        for (i, o) in out.iter_mut().enumerate() {
            let k = i + 1;
            *o -= 0.5 * k as f64 * w[k].re;
        }
    }

    pub fn rhs(&self, spec: &SineSpectrum, p: &ModelParams) -> SineSpectrum {
        let psi = spec.coeffs();
        let mut out: Vec<f64> = psi.iter().enumerate().map(|(i, v)| -p.damping(i + 1) * v).collect();
        self.nonlinear_into(psi, &mut out);
        SineSpectrum::new(out).expect("finite input gives finite output")
    }
}

/// Right-hand side through the padded transform path.
pub fn rhs_pseudospectral(spec: &SineSpectrum, p: &ModelParams) -> SineSpectrum {
    PseudoSpectral::new(spec.modes()).expect("dealiased grid size is valid").rhs(spec, p)
}

/// Which evaluator supplies the nonlinear term during time stepping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Direct,
    #[default]
    Pseudospectral,
    /// Drops the nonlinearity; isolates the integrating factor.
    LinearOnly,
}

enum NonlinearEval {
    Direct,
    Transform(PseudoSpectral),
    None,
}

/// Integrating-factor RK4 stepper for a fixed mode count.
pub struct Stepper {
    params: ModelParams,
    rates: Vec<f64>,
    eval: NonlinearEval,
    cached_dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Stepper {
    pub fn new(modes: usize, params: ModelParams, kernel: Kernel) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidSpectrum("at least one mode is required".into()));
        }
        let eval = match kernel {
            Kernel::Direct => NonlinearEval::Direct,
            Kernel::Pseudospectral => NonlinearEval::Transform(PseudoSpectral::new(modes)?),
            Kernel::LinearOnly => NonlinearEval::None,
        };
        Ok(Stepper {
            params,
            rates: (1..=modes).map(|n| params.damping(n)).collect(),
            eval,
            cached_dt: f64::NAN,
            full: vec![1.0; modes],
            half: vec![1.0; modes],
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn nonlinear(&self, psi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; psi.len()];
        match &self.eval {
            NonlinearEval::Direct => nonlinear_direct_into(psi, &mut out),
            NonlinearEval::Transform(ps) => ps.nonlinear_into(psi, &mut out),
            NonlinearEval::None => {}
        }
        out
    }

    fn factors(&mut self, dt: f64) {
        if self.cached_dt != dt {
            for (i, r) in self.rates.iter().enumerate() {
                self.full[i] = (-r * dt).exp();
                self.half[i] = (-r * 0.5 * dt).exp();
            }
            self.cached_dt = dt;
        }
    }

    /// One step; `psi` is updated in place.
    pub fn advance(&mut self, psi: &mut [f64], dt: f64, time: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        self.factors(dt);
        let n = psi.len();
        let (e, eh) = (&self.full, &self.half);
        let k1 = self.nonlinear(psi);
        let a: Vec<f64> = (0..n).map(|i| eh[i] * (psi[i] + 0.5 * dt * k1[i])).collect();
        let k2 = self.nonlinear(&a);
        let b: Vec<f64> = (0..n).map(|i| eh[i] * psi[i] + 0.5 * dt * k2[i]).collect();
        let k3 = self.nonlinear(&b);
        let c: Vec<f64> = (0..n).map(|i| e[i] * psi[i] + dt * eh[i] * k3[i]).collect();
        let k4 = self.nonlinear(&c);
        let mut finite = true;
        for i in 0..n {
            psi[i] = e[i] * psi[i] + dt / 6.0 * (e[i] * k1[i] + 2.0 * eh[i] * (k2[i] + k3[i]) + k4[i]);
            finite &= psi[i].is_finite();
        }
        if finite {
            Ok(())
        } else {
            Err(Error::StepFailure { time: time + dt })
        }
    }
}

/// One integrating-factor RK4 step with the pseudospectral nonlinearity.
pub fn step(spec: &SineSpectrum, p: &ModelParams, dt: f64) -> Result<SineSpectrum> {
    step_with(spec, p, dt, Kernel::Pseudospectral)
}

pub fn step_with(spec: &SineSpectrum, p: &ModelParams, dt: f64, kernel: Kernel) -> Result<SineSpectrum> {
    let mut stepper = Stepper::new(spec.modes(), *p, kernel)?;
    let mut psi = spec.coeffs().to_vec();
    stepper.advance(&mut psi, dt, 0.0)?;
    SineSpectrum::new(psi)
}

/// Resolution-loss thresholds used to halt a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionPolicy {
    /// Energy fraction in the top eighth of the modes.
    pub tail_fraction: f64,
    /// Growth of the `Ḣ¹` norm relative to its initial value.
    pub h1_growth: f64,
}

// L weights modes by 1/n and feels the coefficient tail long before the energy does;
// at 1e-5 the truncated dL/dt already drifts off the continuous identity.
impl Default for DetectionPolicy {
    fn default() -> Self {
        DetectionPolicy { tail_fraction: 1e-6, h1_growth: 1e3 }
    }
}

impl DetectionPolicy {
    pub fn triggered(&self, tail_fraction: f64, h1_norm: f64, h1_initial: f64) -> bool {
        tail_fraction > self.tail_fraction || (h1_initial > 0.0 && h1_norm > self.h1_growth * h1_initial)
    }
}

/// Options for [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    /// Record every `stride` steps (the final and detection times are always recorded).
    pub stride: usize,
    pub kernel: Kernel,
    /// Scale `r` of the attractor-distance column; `None` picks `‖u⁰‖/‖F‖`.
    pub distance_scale: Option<f64>,
    /// `None` never halts early.
    pub detection: Option<DetectionPolicy>,
    /// Keep the spectrum at every recorded time.
    pub store_spectra: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            stride: 10,
            kernel: Kernel::Pseudospectral,
            distance_scale: None,
            detection: Some(DetectionPolicy::default()),
            store_spectra: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TEndReached,
    BlowupDetected,
    StepFailure,
}

/// Diagnostics at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub energy: f64,
    pub diss_integral: f64,
    pub lyapunov: f64,
    pub dist_rf: f64,
    pub h1_norm: f64,
    pub tail_fraction: f64,
    pub min_ux: f64,
}

pub const CSV_HEADER: &str = "t,energy,diss_integral,lyapunov,dist_rF,h1_norm,tail_fraction,min_ux";

/// Energy in the top eighth of the modes over the total (0 for the zero field).
pub fn tail_fraction(psi: &[f64]) -> f64 {
    let n = psi.len();
    let start = n - (n / 8).max(1);
    let total: f64 = psi.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    let tail: f64 = psi[start..].iter().map(|v| v * v).sum();
    (tail / total).clamp(0.0, 1.0)
}

fn h_alpha_sq(psi: &[f64], alpha: f64) -> f64 {
    4.0 * PI * psi.iter().enumerate().map(|(i, v)| ((i + 1) as f64).powf(2.0 * alpha) * v * v).sum::<f64>()
}

/// Time series produced by [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub params: ModelParams,
    pub modes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub kernel: Kernel,
    pub distance_scale: f64,
    pub initial_energy: f64,
    pub rows: Vec<Diagnostics>,
    pub spectra: Option<Vec<SineSpectrum>>,
    pub termination: Termination,
    pub failure_time: Option<f64>,
}

/// Sidecar metadata written next to the CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunMetadata {
    pub params: ModelParams,
    #[serde(rename = "N")]
    pub modes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub kernel: Kernel,
    pub distance_scale: f64,
    pub termination: Termination,
    pub final_time: f64,
    pub detection_time: Option<f64>,
}

impl SimulationRecord {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn last(&self) -> &Diagnostics {
        self.rows.last().expect("records hold at least the initial row")
    }

    /// Largest `|E(t) + D(t) − E(0)| / E(0)` over recorded rows.
    pub fn max_energy_residual(&self) -> f64 {
        if self.initial_energy == 0.0 {
            return 0.0;
        }
        self.rows
            .iter()
            .map(|r| (r.energy + r.diss_integral - self.initial_energy).abs() / self.initial_energy)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.rows.len() * 200);
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let vals = [r.t, r.energy, r.diss_integral, r.lyapunov, r.dist_rf, r.h1_norm, r.tail_fraction, r.min_ux];
            for (i, v) in vals.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{}", format_float(*v)).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn metadata(&self) -> RunMetadata {
        RunMetadata {
            params: self.params,
            modes: self.modes,
            dt: self.dt,
            t_end: self.t_end,
            stride: self.stride,
            kernel: self.kernel,
            distance_scale: self.distance_scale,
            termination: self.termination,
            final_time: self.last().t,
            detection_time: match self.termination {
                Termination::BlowupDetected => Some(self.last().t),
                _ => None,
            },
        }
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&self.metadata())?)?;
        Ok(())
    }
}

/// Seventeen significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

struct DiagnosticContext {
    params: ModelParams,
    r: f64,
    derivative: SineTransform,
}

impl DiagnosticContext {
    fn row(&self, t: f64, psi: &[f64], diss_integral: f64) -> Diagnostics {
        let energy = 4.0 * PI * psi.iter().map(|v| v * v).sum::<f64>();
        let lyapunov = 4.0 * PI * psi.iter().enumerate().map(|(i, v)| v / (i + 1) as f64).sum::<f64>();
        let dist_rf = energy - 2.0 * self.r * lyapunov + self.r * self.r * attractors::F_L2_NORM_SQ;
        let h1 = h_alpha_sq(psi, 1.0).sqrt();
        let min_ux = self.derivative.synthesize_derivative(psi).into_iter().fold(f64::INFINITY, f64::min);
        Diagnostics { t, energy, diss_integral, lyapunov, dist_rf, h1_norm: h1, tail_fraction: tail_fraction(psi), min_ux }
    }
}

/// Fixed-step march from `spec0` to `t_end`.
///
/// The dissipation integral `2ν ∫ ‖u‖²_{Ḣᵅ}` is accumulated by the trapezoid
/// rule at every step. A step failure ends the run and is reported through
/// [`SimulationRecord::termination`] together with the partial record.
pub fn evolve(spec0: &SineSpectrum, p: &ModelParams, t_end: f64, dt: f64, cfg: &EvolveConfig) -> Result<SimulationRecord> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must be positive")));
    }
    if cfg.stride == 0 {
        return Err(Error::InvalidParameter("diagnostic stride must be positive".into()));
    }
    let modes = spec0.modes();
    let initial_energy = spec0.energy();
    let r = match cfg.distance_scale {
        Some(r) => r,
        None => (initial_energy / attractors::F_L2_NORM_SQ).sqrt(),
    };
    let ctx = DiagnosticContext {
        params: *p,
        r,
        derivative: SineTransform::new(dealiased_grid_size(modes))?,
    };
    let mut stepper = Stepper::new(modes, *p, cfg.kernel)?;
    let mut psi = spec0.coeffs().to_vec();

    let n_steps = {
        let q = t_end / dt;
        let r = q.round();
        if (q - r).abs() <= 1e-9 * q.max(1.0) {
            r as usize
        } else {
            q.ceil() as usize
        }
    };

    let dissipation = |psi: &[f64]| 2.0 * ctx.params.nu * h_alpha_sq(psi, ctx.params.alpha);
    let mut diss_integral = 0.0;
    let mut diss_rate = dissipation(&psi);
    let first = ctx.row(0.0, &psi, 0.0);
    let h1_initial = first.h1_norm;
    let mut rows = vec![first];
    let mut spectra = cfg.store_spectra.then(|| vec![spec0.clone()]);
    let mut termination = Termination::TEndReached;
    let mut failure_time = None;
    let mut t = 0.0;

    for k in 1..=n_steps {
        let t_next = if k == n_steps { t_end } else { k as f64 * dt };
        let h = t_next - t;
        if let Err(e) = stepper.advance(&mut psi, h, t) {
            termination = Termination::StepFailure;
            failure_time = Some(match e {
                Error::StepFailure { time } => time,
                _ => t_next,
            });
            break;
        }
        let rate = dissipation(&psi);
        diss_integral += 0.5 * h * (diss_rate + rate);
        diss_rate = rate;
        t = t_next;

        let detected = cfg
            .detection
            .map(|pol| pol.triggered(tail_fraction(&psi), h_alpha_sq(&psi, 1.0).sqrt(), h1_initial))
            .unwrap_or(false);
        if k % cfg.stride == 0 || k == n_steps || detected {
            rows.push(ctx.row(t, &psi, diss_integral));
            if let Some(s) = spectra.as_mut() {
                s.push(SineSpectrum::new(psi.clone())?);
            }
        }
        if detected {
            termination = Termination::BlowupDetected;
            break;
        }
    }

    Ok(SimulationRecord {
        params: *p,
        modes,
        dt,
        t_end,
        stride: cfg.stride,
        kernel: cfg.kernel,
        distance_scale: r,
        initial_energy,
        rows,
        spectra,
        termination,
        failure_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0).is_err());
        assert!(ModelParams::new(1.5, 1.0).is_err());
        assert!(ModelParams::new(0.5, -1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn single_mode_feeds_second_harmonic() {
        let s = SineSpectrum::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let d = rhs_direct(&s, &ModelParams::inviscid());
        assert_eq!(d.coeffs(), &[0.0, 1.0, 0.0, 0.0]);
        let ps = rhs_pseudospectral(&s, &ModelParams::inviscid());
        for (a, b) in d.coeffs().iter().zip(ps.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_mode_hand_expansion() {
        let s = SineSpectrum::new(vec![1.0, 1.0]).unwrap();
        let p = ModelParams::new(0.5, 1.0).unwrap();
        let d = rhs_direct(&s, &p);
        assert!((d.coeff(1) + 2.0).abs() < 1e-15);
        assert!((d.coeff(2) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_is_fixed_point() {
        let z = SineSpectrum::zeros(16).unwrap();
        let p = ModelParams::new(0.3, 0.2).unwrap();
        assert!(rhs_direct(&z, &p).is_zero());
        assert!(rhs_pseudospectral(&z, &p).is_zero());
    }

    #[test]
    fn dealiased_sizes() {
        assert_eq!(dealiased_grid_size(1), 4);
        assert_eq!(dealiased_grid_size(64), 256);
        assert_eq!(dealiased_grid_size(1024), 4096);
    }

    #[test]
    fn linear_only_is_exact_decay() {
        let s = SineSpectrum::new(vec![1.0, -0.5, 0.25]).unwrap();
        let p = ModelParams::new(0.75, 0.3).unwrap();
        let dt = 0.1;
        let out = step_with(&s, &p, dt, Kernel::LinearOnly).unwrap();
        for n in 1..=3 {
            let expect = s.coeff(n) * (-p.damping(n) * dt).exp();
            assert!((out.coeff(n) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn huge_step_reports_failure() {
        let s = SineSpectrum::from_fn(32, |n| 1e3 / n as f64).unwrap();
        let p = ModelParams::inviscid();
        let mut psi = s.coeffs().to_vec();
        let mut st = Stepper::new(32, p, Kernel::Direct).unwrap();
        let mut failed = false;
        for k in 0..50 {
            if st.advance(&mut psi, 10.0, k as f64 * 10.0).is_err() {
                failed = true;
                break;
            }
        }
        assert!(failed);
    }

    #[test]
    fn rejects_non_positive_dt() {
        let s = SineSpectrum::new(vec![1.0]).unwrap();
        assert!(step(&s, &ModelParams::inviscid(), 0.0).is_err());
    }

    #[test]
    fn tail_fraction_bounds() {
        assert_eq!(tail_fraction(&[0.0; 16]), 0.0);
        let mut v = vec![0.0; 16];
        v[15] = 1.0;
        assert_eq!(tail_fraction(&v), 1.0);
        v[0] = 1.0;
        assert_eq!(tail_fraction(&v), 0.5);
    }

    #[test]
    fn dissipative_run_decays() {
        let s = SineSpectrum::sine(0.1, 32).unwrap();
        let p = ModelParams::new(1.0, 1.0).unwrap();
        let rec = evolve(&s, &p, 1.0, 1e-3, &EvolveConfig::default()).unwrap();
        assert_eq!(rec.termination, Termination::TEndReached);
        for w in rec.rows.windows(2) {
            assert!(w[1].energy < w[0].energy);
            assert!(w[1].t > w[0].t);
        }
        assert!((rec.last().t - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = SineSpectrum::sine(1.0, 8).unwrap();
        let rec = evolve(&s, &ModelParams::new(1.0, 0.1).unwrap(), 0.01, 1e-3, &EvolveConfig::default()).unwrap();
        let csv = rec.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.count(), rec.rows.len());
        assert_eq!(rec.rows.len(), 2);
    }
}

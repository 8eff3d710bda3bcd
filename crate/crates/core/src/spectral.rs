//! Odd torus fields in coefficient and physical space.
//!
//! A [`SineSpectrum`] holds `ψ_1..ψ_N` for the field
//!
//! ```text
//! u(x) = -2 Σ_{n=1}^{N} ψ_n sin(n x),
//! ```
//!
//! so that `û(n) = i ψ_n` under `û(k) = (1/2π) ∫ u e^{-ikx} dx`. With this
//! normalization Parseval reads `∫ u v = 4π Σ ψ_n φ_n`.
//!
//! A [`GridFunction`] holds samples on `x_j = -π + 2πj/M` with `M` a power of
//! two, so `x = 0` is always a sample point.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Round-trip tolerance used by tests and the verify suites.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
/// Default relative oddness tolerance for [`analyze`].
pub const ODDNESS_TOLERANCE: f64 = 1e-10;

/// Truncated odd field `u = -2 Σ ψ_n sin(nx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSpectrum {
    psi: Vec<f64>,
}

impl SineSpectrum {
    pub fn new(psi: Vec<f64>) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::InvalidSpectrum("at least one mode is required".into()));
        }
        if let Some(n) = psi.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum(format!("coefficient psi_{} is not finite", n + 1)));
        }
        Ok(SineSpectrum { psi })
    }

    pub fn zeros(modes: usize) -> Result<Self> {
        Self::new(vec![0.0; modes])
    }

    /// Builds `ψ_n = f(n)` for `n = 1..=modes`.
    pub fn from_fn<F: FnMut(usize) -> f64>(modes: usize, mut f: F) -> Result<Self> {
        Self::new((1..=modes).map(&mut f).collect())
    }

    /// Spectrum of `u(x) = -R sin x`, i.e. `ψ_1 = R/2`.
    pub fn sine(amplitude: f64, modes: usize) -> Result<Self> {
        let mut psi = vec![0.0; modes.max(1)];
        psi[0] = 0.5 * amplitude;
        Self::new(psi)
    }

    pub fn modes(&self) -> usize {
        self.psi.len()
    }

    /// Coefficients `ψ_1..ψ_N` (index 0 holds `ψ_1`).
    pub fn coeffs(&self) -> &[f64] {
        &self.psi
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.psi
    }

    /// `ψ_n` for 1-based `n`; zero beyond the stored support.
    pub fn coeff(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.psi.get(n - 1).copied().unwrap_or(0.0)
    }

    /// Zero-pads or truncates to `modes` coefficients.
    pub fn resized(&self, modes: usize) -> Result<Self> {
        let mut psi = self.psi.clone();
        psi.resize(modes, 0.0);
        Self::new(psi)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.psi.iter().map(|v| c * v).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.psi.iter().all(|v| *v == 0.0)
    }

    /// `‖u‖²_{L²} = 4π Σ ψ_n²`.
    pub fn energy(&self) -> f64 {
        4.0 * PI * self.psi.iter().map(|v| v * v).sum::<f64>()
    }

    /// Direct evaluation of `u(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, p) in self.psi.iter().enumerate() {
            acc += p * ((i + 1) as f64 * x).sin();
        }
        -2.0 * acc
    }

    /// Direct evaluation of `∂ₓu(x) = -2 Σ n ψ_n cos(nx)`.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, p) in self.psi.iter().enumerate() {
            let n = (i + 1) as f64;
            acc += n * p * (n * x).cos();
        }
        -2.0 * acc
    }

    /// Upper bound `2 Σ |ψ_n| ≥ ‖u‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        2.0 * self.psi.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn l1_coeffs(&self) -> f64 {
        self.psi.iter().map(|v| v.abs()).sum()
    }
}

/// `x_j = -π + 2πj/M`.
pub fn grid_point(j: usize, m: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / m as f64
}

fn check_grid_size(m: usize) -> Result<()> {
    if m < 4 || !m.is_power_of_two() {
        return Err(Error::InvalidGrid(format!("grid size {m} must be a power of two >= 4")));
    }
    Ok(())
}

/// Samples of a field on the uniform torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
    odd_tolerance: Option<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        check_grid_size(samples.len())?;
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        Ok(GridFunction { samples, odd_tolerance: None })
    }

    /// Grid tagged odd; rejected if `max_j |u(x_j) + u(-x_j)|` exceeds `tolerance`.
    pub fn new_odd(samples: Vec<f64>, tolerance: f64) -> Result<Self> {
        let mut g = Self::new(samples)?;
        let residual = g.odd_symmetry_residual();
        if residual > tolerance {
            return Err(Error::NotOdd { residual, tolerance });
        }
        g.odd_tolerance = Some(tolerance);
        Ok(g)
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(m: usize, mut f: F) -> Result<Self> {
        check_grid_size(m)?;
        Self::new((0..m).map(|j| f(grid_point(j, m))).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn point(&self, j: usize) -> f64 {
        grid_point(j, self.len())
    }

    pub fn is_tagged_odd(&self) -> bool {
        self.odd_tolerance.is_some()
    }

    pub fn odd_tolerance(&self) -> Option<f64> {
        self.odd_tolerance
    }

    /// `max_j |u(x_j) + u(-x_j mod 2π)|`.
    pub fn odd_symmetry_residual(&self) -> f64 {
        let m = self.len();
        (0..m)
            .map(|j| (self.samples[j] + self.samples[(m - j) % m]).abs())
            .fold(0.0, f64::max)
    }

    /// Samples at `x = 0, h, ..., π` (indices `M/2..=M`, wrapping at `M`).
    pub fn half_period(&self) -> Vec<f64> {
        let m = self.len();
        (m / 2..=m).map(|j| self.samples[j % m]).collect()
    }

    /// `∫ u²` by the periodic trapezoid rule.
    pub fn l2_norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|v| v * v).collect();
        quadrature::periodic_trapezoid(&sq)
    }

    /// `‖u‖_{L^q}` for `q ≥ 1` (pass `f64::INFINITY` for the sup norm).
    ///
    /// For grids tagged odd the integral is `2 ∫_0^π |u|^q` by Simpson's rule,
    /// which avoids the kink of `|u|` at the origin. The sup norm refines the
    /// discrete maximum with a parabola through its neighbours.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        let m = self.len();
        let h = 2.0 * PI / m as f64;
        if q == 2.0 {
            Ok(self.l2_norm_sq().sqrt())
        } else if q >= 1.0 && q.is_finite() {
            let integral = if self.is_tagged_odd() {
                let half: Vec<f64> = self.half_period().iter().map(|v| v.abs().powf(q)).collect();
                2.0 * quadrature::simpson(&half, h)
            } else {
                let abs: Vec<f64> = self.samples.iter().map(|v| v.abs().powf(q)).collect();
                quadrature::periodic_trapezoid(&abs)
            };
            Ok(integral.powf(1.0 / q))
        } else if q.is_infinite() {
            let (jmax, _) = self
                .samples
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bj, bv), (j, v)| if v.abs() > bv { (j, v.abs()) } else { (bj, bv) });
            let a = self.samples[(jmax + m - 1) % m].abs();
            let b = self.samples[jmax].abs();
            let c = self.samples[(jmax + 1) % m].abs();
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                let shift = 0.5 * (a - c) / denom;
                Ok(b - 0.25 * (a - c) * shift)
            } else {
                Ok(b)
            }
        } else {
            Err(Error::InvalidParameter(format!("unsupported norm exponent q = {q}")))
        }
    }
}

/// Cached real FFT plans for one grid size.
#[derive(Clone)]
pub struct SineTransform {
    m: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("m", &self.m).finish()
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SineTransform {
    pub fn new(m: usize) -> Result<Self> {
        check_grid_size(m)?;
        let mut planner = RealFftPlanner::<f64>::new();
        Ok(SineTransform { m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) })
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    /// Inverse transform of a half spectrum `X_k`, `k = 0..=M/2`.
    fn inverse_half(&self, mut half: Vec<Complex<f64>>) -> Vec<f64> {
        let mut out = self.inverse.make_output_vec();
        self.inverse
            .process(&mut half, &mut out)
            .expect("half spectrum has real DC and Nyquist terms");
        out
    }

    /// `û(k)` for `k = 0..=M/2` under the grid offset `x_0 = -π`.
    pub fn forward_coefficients(&self, samples: &[f64]) -> Vec<Complex<f64>> {
        assert_eq!(samples.len(), self.m);
        let mut input = samples.to_vec();
        let mut spec = self.forward.make_output_vec();
        self.forward.process(&mut input, &mut spec).expect("buffer sizes match the plan");
        let scale = 1.0 / self.m as f64;
        spec.iter().enumerate().map(|(k, c)| c * (sign(k) * scale)).collect()
    }

    /// Samples of `-2 Σ ψ_n sin(n x_j)`. A mode at the Nyquist index vanishes on the grid.
    pub fn synthesize(&self, psi: &[f64]) -> Vec<f64> {
        let mut half = vec![Complex::new(0.0, 0.0); self.m / 2 + 1];
        for (i, p) in psi.iter().enumerate() {
            let k = i + 1;
            if k >= self.m / 2 {
                break;
            }
            half[k] = Complex::new(0.0, sign(k) * p);
        }
        self.inverse_half(half)
    }

    /// Samples of `∂ₓu = -2 Σ n ψ_n cos(n x_j)`.
    pub fn synthesize_derivative(&self, psi: &[f64]) -> Vec<f64> {
        let mut half = vec![Complex::new(0.0, 0.0); self.m / 2 + 1];
        for (i, p) in psi.iter().enumerate() {
            let k = i + 1;
            if k > self.m / 2 {
                break;
            }
            let v = -(k as f64) * p * sign(k);
            // the Nyquist bin is not doubled by the hermitian extension
            half[k] = Complex::new(if k == self.m / 2 { 2.0 * v } else { v }, 0.0);
        }
        self.inverse_half(half)
    }

    /// Sine coefficients `ψ_n = Im û(n)` for `n = 1..=modes` and the relative
    /// energy of the even (cosine and mean) part.
    pub fn analyze(&self, samples: &[f64], modes: usize) -> (Vec<f64>, f64) {
        let coeffs = self.forward_coefficients(samples);
        let psi = (1..=modes).map(|n| coeffs[n].im).collect();
        let half = self.m / 2;
        let mut even = coeffs[0].re * coeffs[0].re + coeffs[half].re * coeffs[half].re;
        let mut total = even + coeffs[0].im * coeffs[0].im;
        for c in &coeffs[1..half] {
            even += 2.0 * c.re * c.re;
            total += 2.0 * c.norm_sqr();
        }
        let residual = if total > 0.0 { (even / total).sqrt() } else { 0.0 };
        (psi, residual)
    }
}

/// Samples of the spectrum on an `M`-point grid.
pub fn synthesize(spec: &SineSpectrum, m: usize) -> Result<GridFunction> {
    if m < 2 * spec.modes() {
        return Err(Error::UnderResolved { grid: m, modes: spec.modes() });
    }
    let t = SineTransform::new(m)?;
    GridFunction::new(t.synthesize(spec.coeffs()))
}

/// Sine coefficients `ψ_1..ψ_N` of a grid function, rejecting even content.
///
/// Requires `M > 2N`: the `M/2` sine mode vanishes at every sample.
pub fn analyze(grid: &GridFunction, modes: usize) -> Result<SineSpectrum> {
    analyze_with_tolerance(grid, modes, ODDNESS_TOLERANCE)
}

pub fn analyze_with_tolerance(grid: &GridFunction, modes: usize, tolerance: f64) -> Result<SineSpectrum> {
    if modes == 0 {
        return Err(Error::InvalidSpectrum("at least one mode is required".into()));
    }
    if grid.len() <= 2 * modes {
        return Err(Error::UnderResolved { grid: grid.len(), modes });
    }
    let t = SineTransform::new(grid.len())?;
    let (psi, residual) = t.analyze(grid.samples(), modes);
    if residual > tolerance {
        return Err(Error::NotOdd { residual, tolerance });
    }
    SineSpectrum::new(psi)
}

/// O(NM) synthesis by direct summation; reference for [`synthesize`].
pub fn synthesize_direct(spec: &SineSpectrum, m: usize) -> Result<GridFunction> {
    check_grid_size(m)?;
    GridFunction::new((0..m).map(|j| spec.eval(grid_point(j, m))).collect())
}

/// O(NM) analysis by direct summation; reference for [`analyze`].
pub fn analyze_direct(grid: &GridFunction, modes: usize) -> Result<SineSpectrum> {
    let m = grid.len();
    let psi = (1..=modes)
        .map(|n| {
            let s: f64 = grid
                .samples()
                .iter()
                .enumerate()
                .map(|(j, u)| u * (n as f64 * grid_point(j, m)).sin())
                .sum();
            -s / m as f64
        })
        .collect();
    SineSpectrum::new(psi)
}

/// `‖u‖_{Ḣˢ} = sqrt(4π Σ n^{2s} ψ_n²)`.
pub fn sobolev_norm(spec: &SineSpectrum, s: f64) -> f64 {
    sobolev_norm_sq(spec, s).sqrt()
}

pub fn sobolev_norm_sq(spec: &SineSpectrum, s: f64) -> f64 {
    let sum: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, p)| ((i + 1) as f64).powf(2.0 * s) * p * p)
        .sum();
    4.0 * PI * sum
}

/// `∫ u v = 4π Σ ψ_n φ_n`; the shorter spectrum is zero-padded.
pub fn inner_product(a: &SineSpectrum, b: &SineSpectrum) -> f64 {
    4.0 * PI * a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y).sum::<f64>()
}

/// On-disk spectrum: `{"N": int, "psi": [...], "convention": "..."}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumFile {
    #[serde(rename = "N")]
    pub modes: usize,
    pub psi: Vec<f64>,
    #[serde(default = "default_convention")]
    pub convention: String,
}

pub const SPECTRUM_CONVENTION: &str = "u(x) = -2 * sum_{n=1}^{N} psi_n * sin(n x)";

fn default_convention() -> String {
    SPECTRUM_CONVENTION.to_string()
}

impl From<&SineSpectrum> for SpectrumFile {
    fn from(s: &SineSpectrum) -> Self {
        SpectrumFile { modes: s.modes(), psi: s.coeffs().to_vec(), convention: default_convention() }
    }
}

impl TryFrom<SpectrumFile> for SineSpectrum {
    type Error = Error;

    fn try_from(f: SpectrumFile) -> Result<Self> {
        if f.modes != f.psi.len() {
            return Err(Error::InvalidSpectrum(format!("N = {} but {} coefficients given", f.modes, f.psi.len())));
        }
        SineSpectrum::new(f.psi)
    }
}

pub fn read_spectrum(path: &Path) -> Result<SineSpectrum> {
    let text = std::fs::read_to_string(path)?;
    let file: SpectrumFile = serde_json::from_str(&text)?;
    file.try_into()
}

pub fn write_spectrum(path: &Path, spec: &SineSpectrum) -> Result<()> {
    let text = serde_json::to_string_pretty(&SpectrumFile::from(spec))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_nan() {
        assert!(SineSpectrum::new(vec![]).is_err());
        assert!(SineSpectrum::new(vec![1.0, f64::NAN]).is_err());
        assert!(SineSpectrum::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn grid_size_must_be_power_of_two() {
        assert!(GridFunction::new(vec![0.0; 6]).is_err());
        assert!(GridFunction::new(vec![0.0; 2]).is_err());
        assert!(GridFunction::new(vec![0.0; 8]).is_ok());
    }

    #[test]
    fn single_mode_synthesis() {
        let s = SineSpectrum::new(vec![0.5]).unwrap();
        let g = synthesize(&s, 8).unwrap();
        for (j, v) in g.samples().iter().enumerate() {
            assert!((v + grid_point(j, 8).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_field_synthesizes_to_zero() {
        let g = synthesize(&SineSpectrum::zeros(5).unwrap(), 16).unwrap();
        assert!(g.samples().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn synthesize_rejects_under_resolution() {
        let s = SineSpectrum::zeros(5).unwrap();
        assert_eq!(synthesize(&s, 8), Err(Error::UnderResolved { grid: 8, modes: 5 }));
    }

    #[test]
    fn truncated_sawtooth_at_half_pi_matches_direct_sum() {
        let s = SineSpectrum::from_fn(64, |n| 1.0 / n as f64).unwrap();
        let g = synthesize(&s, 256).unwrap();
        // x = π/2 is index 3M/4
        let direct: f64 = -2.0 * (1..=64).map(|n| (n as f64 * PI / 2.0).sin() / n as f64).sum::<f64>();
        assert!((g.samples()[192] - direct).abs() < 1e-13);
        // frozen value of the partial sum
        assert!((direct - (-1.555_175_136_849_343)).abs() < 1e-13);
    }

    #[test]
    fn analyze_single_mode() {
        let g = GridFunction::from_fn(32, |x| -2.0 * (3.0 * x).sin()).unwrap();
        let s = analyze(&g, 8).unwrap();
        for n in 1..=8 {
            let expect = if n == 3 { 1.0 } else { 0.0 };
            assert!((s.coeff(n) - expect).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn analyze_rejects_even_input() {
        let g = GridFunction::from_fn(32, f64::cos).unwrap();
        assert!(matches!(analyze(&g, 8), Err(Error::NotOdd { .. })));
    }

    #[test]
    fn analyze_rejects_nyquist_resolution() {
        let g = GridFunction::from_fn(16, f64::sin).unwrap();
        assert!(matches!(analyze(&g, 8), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn derivative_synthesis_matches_direct() {
        let s = SineSpectrum::new(vec![0.3, -0.2, 0.7, 0.1]).unwrap();
        let t = SineTransform::new(16).unwrap();
        let du = t.synthesize_derivative(s.coeffs());
        for (j, v) in du.iter().enumerate() {
            assert!((v - s.eval_derivative(grid_point(j, 16))).abs() < 1e-13);
        }
    }

    #[test]
    fn norm_examples() {
        let s = SineSpectrum::new(vec![0.5]).unwrap();
        assert!((sobolev_norm(&s, 0.0) - PI.sqrt()).abs() < 1e-15);
        let one = SineSpectrum::new(vec![1.0]).unwrap();
        assert!((sobolev_norm(&one, 2.0) - (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!((inner_product(&s, &s) - PI).abs() < 1e-15);
    }

    #[test]
    fn truncated_sawtooth_norm_converges() {
        let s = SineSpectrum::from_fn(200_000, |n| 1.0 / n as f64).unwrap();
        let target = (2.0 * PI.powi(3) / 3.0).sqrt();
        // tail 4π Σ_{n>N} 1/n² ≈ 4π/N
        let err = (sobolev_norm(&s, 0.0).powi(2) - target * target).abs();
        assert!(err < 4.0 * PI / 200_000.0 * 1.01);
    }

    #[test]
    fn inner_product_examples() {
        let a = SineSpectrum::new(vec![0.5]).unwrap();
        let f = SineSpectrum::from_fn(64, |n| 1.0 / n as f64).unwrap();
        assert!((inner_product(&a, &f) - 2.0 * PI).abs() < 1e-14);
        let e1 = SineSpectrum::new(vec![1.0]).unwrap();
        let e2 = SineSpectrum::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(inner_product(&e1, &e2), 0.0);
    }

    #[test]
    fn lq_norms_of_sine() {
        let g = GridFunction::new_odd(GridFunction::from_fn(256, |x| -x.sin()).unwrap().samples().to_vec(), 1e-12)
            .unwrap();
        assert!((g.lq_norm(1.0).unwrap() - 4.0).abs() < 1e-8);
        assert!((g.lq_norm(2.0).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((g.lq_norm(f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        assert!(g.lq_norm(0.5).is_err());
    }

    #[test]
    fn odd_tag_rejects_asymmetric_samples() {
        let samples = GridFunction::from_fn(16, |x| x.sin() + 0.1).unwrap().samples().to_vec();
        assert!(matches!(GridFunction::new_odd(samples, 1e-10), Err(Error::NotOdd { .. })));
    }

    #[test]
    fn spectrum_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let s = SineSpectrum::new(vec![0.25, -1.5, 3.0e-7]).unwrap();
        write_spectrum(&path, &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"convention\""));
        assert_eq!(read_spectrum(&path).unwrap(), s);
    }

    #[test]
    fn spectrum_file_length_mismatch() {
        let f = SpectrumFile { modes: 3, psi: vec![1.0], convention: SPECTRUM_CONVENTION.into() };
        assert!(SineSpectrum::try_from(f).is_err());
    }
}

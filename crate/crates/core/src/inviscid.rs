//! Inviscid solutions by the method of characteristics.
//!
//! Before the first gradient catastrophe the solution is `u(x,t) = u⁰(ξ)` with
//! `ξ + t u⁰(ξ) = x`. The map `ξ ↦ ξ + t u⁰(ξ)` is strictly increasing for
//! `t < T_max = 1 / (-min ∂ₓu⁰)`, so the root is unique.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::golden_section_min;
use crate::spectral::{grid_point, GridFunction, SineSpectrum};

/// Default relative guard below `T_max`.
pub const HORIZON_GUARD: f64 = 1e-6;
/// Dense sampling used to bracket the minimum of `∂ₓu⁰`.
pub const EXTREMUM_SAMPLES: usize = 4096;
const NEWTON_MAX_ITER: usize = 50;
const RESIDUAL_TOL: f64 = 1e-12;

/// Initial data `u⁰` with closed-form evaluation of `u⁰` and `∂ₓu⁰`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialField {
    spectrum: SineSpectrum,
    sup_bound: f64,
}

impl InitialField {
    pub fn new(spectrum: SineSpectrum) -> Self {
        let sup_bound = spectrum.sup_bound();
        InitialField { spectrum, sup_bound }
    }

    pub fn spectrum(&self) -> &SineSpectrum {
        &self.spectrum
    }

    pub fn value(&self, x: f64) -> f64 {
        self.spectrum.eval(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.spectrum.eval_derivative(x)
    }

    /// `2 Σ |ψ_n|`, an upper bound on `‖u⁰‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }
}

/// Location and value of `min ∂ₓu⁰`.
fn derivative_minimum(u0: &InitialField) -> (f64, f64) {
    let m = EXTREMUM_SAMPLES;
    let h = 2.0 * PI / m as f64;
    let (mut best_x, mut best) = (0.0, f64::INFINITY);
    for j in 0..m {
        let x = grid_point(j, m);
        let d = u0.derivative(x);
        if d < best {
            best = d;
            best_x = x;
        }
    }
    let (x, _) = golden_section_min(|x| u0.derivative(x), best_x - h, best_x + h, 1e-12);
    let v = u0.derivative(x).min(best);
    (x, v)
}

/// `1 / (-min ∂ₓu⁰)`, or `+∞` when `∂ₓu⁰ ≥ 0` everywhere.
pub fn tmax_inviscid(u0: &InitialField) -> f64 {
    let (_, min) = derivative_minimum(u0);
    if min < 0.0 {
        -1.0 / min
    } else {
        f64::INFINITY
    }
}

/// Characteristic solver with `T_max` computed once.
#[derive(Debug, Clone)]
pub struct Characteristics {
    u0: InitialField,
    tmax: f64,
    guard: f64,
}

impl Characteristics {
    pub fn new(u0: InitialField) -> Self {
        Self::with_guard(u0, HORIZON_GUARD)
    }

    pub fn with_guard(u0: InitialField, guard: f64) -> Self {
        let tmax = tmax_inviscid(&u0);
        Characteristics { u0, tmax, guard }
    }

    pub fn initial(&self) -> &InitialField {
        &self.u0
    }

    pub fn tmax(&self) -> f64 {
        self.tmax
    }

    /// Largest admissible time `T_max (1 - guard)`.
    pub fn horizon(&self) -> f64 {
        self.tmax * (1.0 - self.guard)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t >= self.horizon() {
            return Err(Error::BeyondHorizon { time: t, horizon: self.horizon() });
        }
        Ok(())
    }

    /// Foot of the characteristic through `(x, t)`.
    pub fn foot(&self, x: f64, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if t == 0.0 {
            return Ok(x);
        }
        let u0 = &self.u0;
        let residual = |xi: f64| xi + t * u0.value(xi) - x;

        let mut xi = x;
        for _ in 0..NEWTON_MAX_ITER {
            let r = residual(xi);
            if r.abs() <= 0.25 * RESIDUAL_TOL {
                return Ok(xi);
            }
            let slope = 1.0 + t * u0.derivative(xi);
            if !(slope > 0.0) {
                break;
            }
            let next = xi - r / slope;
            if !next.is_finite() {
                break;
            }
            if next == xi {
                break;
            }
            xi = next;
        }
        if residual(xi).abs() <= RESIDUAL_TOL {
            return Ok(xi);
        }

        // |u⁰| ≤ sup_bound brackets the root
        let spread = t * u0.sup_bound() + 1e-12;
        let (mut lo, mut hi) = (x - spread, x + spread);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let r = residual(mid);
            if r.abs() <= 0.25 * RESIDUAL_TOL || hi - lo < 1e-15 {
                xi = mid;
                break;
            }
            if r > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            xi = mid;
        }
        if residual(xi).abs() <= RESIDUAL_TOL {
            Ok(xi)
        } else {
            Err(Error::RootFinder { x, t })
        }
    }

    /// `u(x, t) = u⁰(ξ)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let xi = self.foot(x, t)?;
        Ok(self.u0.value(xi))
    }

    /// Samples of `u(·, t)` on the `M`-point grid, tagged odd.
    pub fn sample(&self, t: f64, m: usize) -> Result<GridFunction> {
        self.check_time(t)?;
        let mut samples = Vec::with_capacity(m);
        for j in 0..m {
            samples.push(self.eval(grid_point(j, m), t)?);
        }
        GridFunction::new_odd(samples, 1e-10)
    }
}

/// `u⁰(ξ)` with `ξ + t u⁰(ξ) = x`.
pub fn eval_characteristics(u0: &InitialField, x: f64, t: f64) -> Result<f64> {
    Characteristics::new(u0.clone()).eval(x, t)
}

pub fn sample_solution(u0: &InitialField, t: f64, m: usize) -> Result<GridFunction> {
    Characteristics::new(u0.clone()).sample(t, m)
}

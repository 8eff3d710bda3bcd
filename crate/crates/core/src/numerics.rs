//! Scalar numerical helpers: golden-section search and an adaptive
//! Dormand–Prince 5(4) integrator.

use crate::error::{Error, Result};

/// Minimizes a unimodal `f` on `[a, b]` until the bracket is narrower than `tol`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iter = 0;
    while b - a > tol && iter < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive scalar integrator for `y' = f(t, y)`.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rtol: 1e-13, atol: 1e-15, max_steps: 2_000_000 }
    }
}

impl Dopri5 {
    /// Integrates from `(t0, y0)` to `t1 > t0`, landing exactly on `t1`.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F, t0: f64, y0: f64, t1: f64) -> Result<f64> {
        let mut t = t0;
        let mut y = y0;
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(y0);
        }
        let mut h = (span * 1e-3).max(1e-14);
        let mut k = [0.0; 7];
        for _ in 0..self.max_steps {
            if t >= t1 {
                return Ok(y);
            }
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            k[0] = f(t, y);
            for s in 1..7 {
                let mut acc = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj;
                }
                k[s] = f(t + C[s] * h, acc);
            }
            let mut y5 = y;
            let mut err = 0.0;
            for s in 0..7 {
                y5 += h * B5[s] * k[s];
                err += h * (B5[s] - B4[s]) * k[s];
            }
            let scale = self.atol + self.rtol * y.abs().max(y5.abs());
            let ratio = err.abs() / scale;
            if !y5.is_finite() {
                h *= 0.25;
                continue;
            }
            if ratio <= 1.0 {
                t = if last { t1 } else { t + h };
                y = y5;
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if h < 1e-300 {
                break;
            }
        }
        Err(Error::Invariant("adaptive integrator exhausted its step budget".into()))
    }
}

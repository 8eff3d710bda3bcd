//! Quadrature rules used by the physical-space diagnostics.
//!
//! Odd fields are integrated over the half period `[0, π]`, where every
//! product with an admissible attractor is smooth. The jump of `F` at the
//! origin (or of the sawtooth at `±π`) then sits on an endpoint where the odd
//! factor vanishes, so no kink correction is needed.

use std::f64::consts::PI;

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];

const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Periodic trapezoid rule over one period of length 2π.
pub fn periodic_trapezoid(samples: &[f64]) -> f64 {
    let h = 2.0 * PI / samples.len() as f64;
    h * samples.iter().sum::<f64>()
}

/// Composite Simpson rule on equally spaced samples `f(0), f(h), ..., f(π)`.
///
/// The number of intervals must be even.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let intervals = samples.len() - 1;
    assert!(intervals >= 2 && intervals % 2 == 0, "simpson needs an even interval count");
    let mut acc = samples[0] + samples[intervals];
    for (i, v) in samples.iter().enumerate().take(intervals).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Composite five-point Gauss–Legendre rule on `[a, b]` split into `panels` cells.
///
/// Nodes are interior, so `f` is never evaluated at `a` or `b`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut cell = 0.0;
        for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            cell += weight * f(mid + half * node);
        }
        total += half * cell;
    }
    total
}

/// Integral over the torus of an even integrand, given on the half period.
pub fn even_torus_integral<F: FnMut(f64) -> f64>(panels: usize, f: F) -> f64 {
    2.0 * gauss_legendre(0.0, PI, panels, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_low_trig_polynomials() {
        let m = 16;
        let s: Vec<f64> = (0..m)
            .map(|j| {
                let x = -PI + 2.0 * PI * j as f64 / m as f64;
                (3.0 * x).sin().powi(2)
            })
            .collect();
        assert!((periodic_trapezoid(&s) - PI).abs() < 1e-14);
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let n = 8;
        let h = PI / n as f64;
        let s: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&s, h) - PI.powi(4) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_degree_nine_exact() {
        let v = gauss_legendre(0.0, 2.0, 1, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_smooth_oscillatory() {
        // ∫_0^π x sin(5x) dx = π/5 (since cos(5π) = -1)
        let v = gauss_legendre(0.0, PI, 64, |x| x * (5.0 * x).sin());
        assert!((v - PI / 5.0).abs() < 1e-14);
    }
}

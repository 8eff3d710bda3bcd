use std::f64::consts::PI;

use burgers_lab::attractors::{attractor_distance, c_alpha, key_identity_residual, lyapunov, optimal_r};
use burgers_lab::blowup::corollary_threshold;
use burgers_lab::dynamics::{nonlinear_direct_into, rhs_direct, rhs_pseudospectral};
use burgers_lab::spectral::{analyze, inner_product, synthesize, GridFunction};
use burgers_lab::{ModelParams, SineSpectrum};
use proptest::prelude::*;

fn coeffs(max_modes: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..=max_modes)
}

fn spectrum(max_modes: usize) -> impl Strategy<Value = SineSpectrum> {
    coeffs(max_modes).prop_map(|c| SineSpectrum::new(c).unwrap())
}

fn pair(max_modes: usize) -> impl Strategy<Value = (SineSpectrum, SineSpectrum)> {
    (1..=max_modes).prop_flat_map(|n| {
        (prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-1.0f64..1.0, n))
            .prop_map(|(a, b)| (SineSpectrum::new(a).unwrap(), SineSpectrum::new(b).unwrap()))
    })
}

fn nonlinear(psi: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; psi.len()];
    nonlinear_direct_into(psi, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesis_round_trip(spec in spectrum(48)) {
        let m = (2 * spec.modes() + 1).next_power_of_two().max(4);
        let back = analyze(&synthesize(&spec, m).unwrap(), spec.modes()).unwrap();
        let scale = spec.coeffs().iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (a, b) in spec.coeffs().iter().zip(back.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval_matches_grid_energy(spec in spectrum(48)) {
        let m = (2 * spec.modes() + 1).next_power_of_two().max(4);
        let grid = synthesize(&spec, m).unwrap();
        let e = spec.energy();
        prop_assert!((grid.l2_norm_sq() - e).abs() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn inner_product_is_bilinear_and_bounded((a, b) in pair(32), s in -3.0f64..3.0) {
        let sb = b.scaled(s).unwrap();
        prop_assert!((inner_product(&a, &sb) - s * inner_product(&a, &b)).abs() <= 1e-12 * (1.0 + inner_product(&a, &b).abs() * s.abs()));
        let cs = (a.energy() * b.energy()).sqrt();
        prop_assert!(inner_product(&a, &b).abs() <= cs * (1.0 + 1e-12));
    }

    #[test]
    fn energy_neutrality(spec in spectrum(96)) {
        let nl = nonlinear(spec.coeffs());
        let pairing: f64 = spec.coeffs().iter().zip(&nl).map(|(a, b)| a * b).sum();
        prop_assert!(pairing.abs() <= 1e-12 * spec.l1_coeffs().powi(3));
    }

    #[test]
    fn oracle_equivalence(spec in spectrum(128), alpha in 0.05f64..1.0, nu in 0.0f64..1.0) {
        let p = ModelParams::new(alpha, nu).unwrap();
        let a = rhs_direct(&spec, &p);
        let b = rhs_pseudospectral(&spec, &p);
        let scale = a.coeffs().iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn lyapunov_identity_on_half_support(c in coeffs(32)) {
        let n = 2 * c.len();
        let mut psi = c.clone();
        psi.resize(n, 0.0);
        let nl = nonlinear(&psi);
        let weighted: f64 = nl.iter().enumerate().map(|(i, v)| v / (i + 1) as f64).sum();
        let half_sq = 0.5 * c.iter().map(|v| v * v).sum::<f64>();
        let l1: f64 = c.iter().map(|v| v.abs()).sum();
        prop_assert!((weighted - half_sq).abs() <= 1e-12 * l1 * l1);
    }

    #[test]
    fn key_identity(spec in spectrum(24)) {
        let r = key_identity_residual(&spec).unwrap();
        prop_assert!(r.spectral.abs() <= 1e-10 * spec.energy().max(1e-300));
        prop_assert!(r.quadrature.abs() <= 1e-6);
    }

    #[test]
    fn optimal_r_minimizes_decay_time(spec in spectrum(16), k in -2.0f64..2.0) {
        prop_assume!(spec.energy() > 1e-6);
        let opt = optimal_r(&spec).unwrap();
        let r = opt.r0 * 10f64.powf(k);
        let g = attractor_distance(&spec, r) / (r * spec.energy());
        prop_assert!(g >= opt.g_r0 - 1e-12 * opt.g_r0.abs().max(1.0));
    }

    #[test]
    fn lyapunov_within_ceiling(spec in spectrum(32)) {
        let ceiling = (2.0 * PI.powi(3) / 3.0 * spec.energy()).sqrt();
        prop_assert!(lyapunov(&spec).abs() <= ceiling * (1.0 + 1e-12));
    }

    #[test]
    fn corollary_threshold_increases(a in 0.01f64..0.48, da in 0.001f64..0.01) {
        prop_assert!(corollary_threshold(a + da).unwrap() > corollary_threshold(a).unwrap());
    }

    #[test]
    fn odd_grid_detection(spec in spectrum(16), bump in 1e-6f64..1.0) {
        let m = 64;
        let mut s = synthesize(&spec, m).unwrap().samples().to_vec();
        s[5] += bump;
        prop_assert!(analyze(&GridFunction::new(s).unwrap(), spec.modes()).is_err());
    }
}

#[test]
fn c_alpha_grows_toward_the_critical_exponent() {
    let mut last = 0.0;
    for a in [0.0, 0.1, 0.2, 0.3, 0.4, 0.45, 0.49, 0.499] {
        let c = c_alpha(a, 1e-12).unwrap();
        assert!(c > last);
        last = c;
    }
    assert!(last > 50.0);
}

use burgers_lab::dynamics::{step_with, Kernel};
use burgers_lab::inviscid::{Characteristics, InitialField};
use burgers_lab::spectral::synthesize;
use burgers_lab::{evolve, EvolveConfig, ModelParams, SineSpectrum};

#[derive(Clone, Copy, Debug, PartialEq)]
struct C {
    re: f64,
    im: f64,
}

impl C {
    fn mul(self, o: C) -> C {
        C { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
    fn add(self, o: C) -> C {
        C { re: self.re + o.re, im: self.im + o.im }
    }
    fn scale(self, s: f64) -> C {
        C { re: self.re * s, im: self.im * s }
    }
}

/// Full complex Galerkin system on |k| ≤ N with plain RK4; no symmetry assumed.
struct ComplexGalerkin {
    n: usize,
}

impl ComplexGalerkin {
    fn idx(&self, k: i64) -> usize {
        (k + self.n as i64) as usize
    }

    fn rhs(&self, u: &[C]) -> Vec<C> {
        let n = self.n as i64;
        let mut out = vec![C { re: 0.0, im: 0.0 }; u.len()];
        for k in -n..=n {
            let mut acc = C { re: 0.0, im: 0.0 };
            for p in -n..=n {
                let q = k - p;
                if q.abs() <= n {
                    acc = acc.add(u[self.idx(p)].mul(u[self.idx(q)]));
                }
            }
            // -(i k / 2) Σ û_p û_q
            out[self.idx(k)] = C { re: 0.5 * k as f64 * acc.im, im: -0.5 * k as f64 * acc.re };
        }
        out
    }

    fn step(&self, u: &[C], dt: f64) -> Vec<C> {
        let axpy = |a: &[C], b: &[C], s: f64| a.iter().zip(b).map(|(x, y)| x.add(y.scale(s))).collect::<Vec<_>>();
        let k1 = self.rhs(u);
        let k2 = self.rhs(&axpy(u, &k1, 0.5 * dt));
        let k3 = self.rhs(&axpy(u, &k2, 0.5 * dt));
        let k4 = self.rhs(&axpy(u, &k3, dt));
        (0..u.len())
            .map(|i| u[i].add(k1[i].add(k2[i].scale(2.0)).add(k3[i].scale(2.0)).add(k4[i]).scale(dt / 6.0)))
            .collect()
    }
}

#[test]
fn odd_data_stays_odd_in_the_full_system() {
    let psi = vec![0.5, -0.2, 0.1, 0.03, -0.02, 0.01];
    let n = psi.len();
    let sys = ComplexGalerkin { n };
    let mut u = vec![C { re: 0.0, im: 0.0 }; 2 * n + 1];
    for (i, p) in psi.iter().enumerate() {
        let k = (i + 1) as i64;
        u[sys.idx(k)] = C { re: 0.0, im: *p };
        u[sys.idx(-k)] = C { re: 0.0, im: -*p };
    }
    let p = ModelParams::inviscid();
    let mut spec = SineSpectrum::new(psi).unwrap();
    let dt = 1e-3;
    for _ in 0..200 {
        u = sys.step(&u, dt);
        spec = step_with(&spec, &p, dt, Kernel::Direct).unwrap();
    }
    for k in 1..=n as i64 {
        let (plus, minus) = (u[sys.idx(k)], u[sys.idx(-k)]);
        assert!(plus.re.abs() < 1e-14, "cosine part of mode {k}: {}", plus.re);
        assert!((plus.im + minus.im).abs() < 1e-14);
        assert!((plus.im - spec.coeff(k as usize)).abs() < 1e-13);
    }
    assert!(u[sys.idx(0)].re.abs() < 1e-14 && u[sys.idx(0)].im.abs() < 1e-14);
}

#[test]
fn galerkin_matches_characteristics_before_the_shock() {
    let u0 = SineSpectrum::sine(1.0, 256).unwrap();
    let p = ModelParams::inviscid();
    let cfg = EvolveConfig { stride: 1000, detection: None, store_spectra: true, ..Default::default() };
    let rec = evolve(&u0, &p, 0.5, 1e-3, &cfg).unwrap();
    let last = rec.spectra.unwrap().pop().unwrap();
    let grid = synthesize(&last, 1024).unwrap();
    let exact = Characteristics::new(InitialField::new(SineSpectrum::sine(1.0, 1).unwrap())).sample(0.5, 1024).unwrap();
    let err = grid.samples().iter().zip(exact.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-9, "max deviation {err}");
}

#[test]
fn characteristic_solution_solves_the_pde() {
    let u0 = InitialField::new(SineSpectrum::new(vec![0.5, 0.1, -0.05]).unwrap());
    let ch = Characteristics::new(u0);
    let h = 1e-4;
    for frac in [0.2, 0.6, 0.9] {
        let t = frac * ch.tmax();
        for j in 0..40 {
            let x = -3.0 + 0.15 * j as f64;
            let u = ch.eval(x, t).unwrap();
            let ut = (ch.eval(x, t + h).unwrap() - ch.eval(x, t - h).unwrap()) / (2.0 * h);
            let ux = (ch.eval(x + h, t).unwrap() - ch.eval(x - h, t).unwrap()) / (2.0 * h);
            assert!((ut + u * ux).abs() < 1e-5 * (1.0 + ux.abs()), "t {t} x {x}: {}", ut + u * ux);
        }
    }
}

#[test]
fn lq_norms_are_conserved_by_characteristics() {
    let ch = Characteristics::new(InitialField::new(SineSpectrum::new(vec![0.8, -0.1]).unwrap()));
    let a = ch.sample(0.0, 4096).unwrap();
    let b = ch.sample(0.85 * ch.tmax(), 4096).unwrap();
    for q in [1.0, 3.0, f64::INFINITY] {
        let (x, y) = (a.lq_norm(q).unwrap(), b.lq_norm(q).unwrap());
        assert!((x - y).abs() < 1e-6 * x, "q = {q}: {x} vs {y}");
    }
}

#[test]
fn linear_kernel_is_exact_decay() {
    let p = ModelParams::new(0.75, 0.3).unwrap();
    let spec = SineSpectrum::new(vec![1.0, 0.5, 0.25]).unwrap();
    let out = step_with(&spec, &p, 0.1, Kernel::LinearOnly).unwrap();
    for n in 1..=3 {
        let expected = spec.coeff(n) * (-p.damping(n) * 0.1).exp();
        assert!((out.coeff(n) - expected).abs() < 1e-15);
    }
}

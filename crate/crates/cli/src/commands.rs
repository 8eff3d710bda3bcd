use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use burgers_lab::attractors::{attractor_decay_series, optimal_r, DecayTarget};
use burgers_lab::blowup::{certify_blowup_f, certify_blowup_h, corollary_condition, BlowupCertificate};
use burgers_lab::dynamics::{format_float, DetectionPolicy, Termination};
use burgers_lab::inviscid::{Characteristics, InitialField};
use burgers_lab::verify::{run_suites, SUITE_NAMES};
use burgers_lab::{evolve, EvolveConfig, ModelParams, SineSpectrum};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, InitSpec, RChoice};

/// Fraction of `T_max` beyond which the inviscid table is refused.
pub const INVISCID_TIME_CAP: f64 = 0.999;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_STRIDE: usize = 10;
pub const DEFAULT_GRID: usize = 4096;
const THREADS_ENV: &str = "BURGERS_LAB_THREADS";

#[derive(Debug)]
pub enum Failure {
    /// Bad or missing configuration; exit code 1.
    Config(String),
    /// A run that could not complete; exit code 1.
    Runtime(String),
    /// The time stepper produced non-finite values; exit code 2.
    StepFailure(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::Runtime(_) => 1,
            Failure::StepFailure(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) | Failure::StepFailure(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn config<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Config)
}

fn runtime<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Runtime(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent() {
        runtime(fs::create_dir_all(dir))?;
    }
    runtime(fs::write(path, contents))
}

struct SimulationSetup {
    spec: SineSpectrum,
    params: ModelParams,
    dt: f64,
    t_end: f64,
    evolve: EvolveConfig,
}

fn simulation_setup(cfg: &ExperimentConfig) -> Result<SimulationSetup, Failure> {
    let params = config(cfg.params())?;
    let spec = config(cfg.init_spectrum())?;
    let dt = config(cfg.require_positive("dt", cfg.dt))?;
    let t_end = config(cfg.require_positive("t-end", cfg.t_end))?;
    let stride = cfg.stride.unwrap_or(DEFAULT_STRIDE);
    if stride == 0 {
        return Err(Failure::Config("--stride must be positive".into()));
    }
    let distance_scale = match cfg.r {
        Some(RChoice::Value(r)) => Some(r),
        _ => None,
    };
    let evolve = EvolveConfig {
        stride,
        kernel: cfg.kernel.unwrap_or_default(),
        distance_scale,
        detection: Some(DetectionPolicy::default()),
        store_spectra: false,
    };
    Ok(SimulationSetup { spec, params, dt, t_end, evolve })
}

pub fn run_simulate(cfg: &ExperimentConfig) -> Outcome {
    let s = simulation_setup(cfg)?;
    let out = cfg.out_dir();
    let record = runtime(evolve(&s.spec, &s.params, s.t_end, s.dt, &s.evolve))?;
    runtime(record.write(&out, "run"))?;
    write_file(&out.join("config.json"), &cfg.to_json())?;
    if cfg.certify.unwrap_or(false) {
        if s.params.alpha < 0.5 {
            let cert = runtime(certify_blowup_f(&s.spec, &s.params))?;
            write_file(&out.join("certificate.json"), &runtime(cert.to_json())?)?;
        } else {
            eprintln!("note: no certificate for alpha = {} >= 1/2", s.params.alpha);
        }
    }
    let meta = record.metadata();
    println!("termination: {:?}", meta.termination);
    println!("final_time: {}", format_float(meta.final_time));
    if let Some(t) = meta.detection_time {
        println!("detection_time: {}", format_float(t));
    }
    println!("wrote {}", out.join("run.csv").display());
    if record.termination == Termination::StepFailure {
        return Err(Failure::StepFailure(format!(
            "step failure at t = {}",
            record.failure_time.map_or("?".into(), format_float)
        )));
    }
    Ok(())
}

pub fn run_inviscid(cfg: &ExperimentConfig) -> Outcome {
    let spec = config(cfg.init_spectrum())?;
    let ch = Characteristics::new(InitialField::new(spec.clone()));
    let tmax = ch.tmax();
    let t_end = match cfg.t_end {
        Some(t) => config(cfg.require_positive("t-end", Some(t)))?,
        None if tmax.is_finite() => 0.9 * tmax,
        None => return Err(Failure::Config("missing --t-end (the data never steepens)".into())),
    };
    if t_end > INVISCID_TIME_CAP * tmax {
        return Err(Failure::Runtime(format!(
            "t = {t_end} lies beyond {INVISCID_TIME_CAP} T_max = {}",
            INVISCID_TIME_CAP * tmax
        )));
    }
    let samples = cfg.samples.unwrap_or(9);
    if samples == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    let grid = cfg.grid_size.unwrap_or(DEFAULT_GRID);
    let choice = cfg.attractor_or_f();
    let target = if choice.is_f() {
        let r = match cfg.r {
            Some(RChoice::Value(r)) => r,
            _ => runtime(optimal_r(&spec))?.r0,
        };
        DecayTarget::ScaledF(r)
    } else {
        let h = config(choice.build())?;
        let h = match cfg.r {
            Some(RChoice::Value(r)) => runtime(h.scaled(r))?,
            _ => h,
        };
        DecayTarget::Profile(h)
    };
    let times: Vec<f64> = (1..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
    let series = runtime(attractor_decay_series(&ch, &target, &times, grid))?;

    let mut csv = String::from("t,distance,predicted,residual,slope\n");
    for row in &series.rows {
        let slope = (row.distance - series.d0) / row.t;
        let vals = [row.t, row.distance, row.predicted, row.residual, slope];
        let line: Vec<String> = vals.iter().map(|v| format_float(*v)).collect();
        writeln!(csv, "{}", line.join(",")).unwrap();
    }
    let out = cfg.out_dir();
    write_file(&out.join("inviscid.csv"), &csv)?;
    print!("{csv}");
    println!("T_max = {}", format_float(tmax));
    println!("D(0) = {}", format_float(series.d0));
    println!("bound = {}", format_float(series.predicted_zero()));
    Ok(())
}

pub fn run_verify(cfg: &ExperimentConfig) -> Outcome {
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    if let Some(name) = cfg.suite.as_deref() {
        if !SUITE_NAMES.contains(&name) {
            return Err(Failure::Config(format!("unknown suite {name}; expected one of {}", SUITE_NAMES.join(", "))));
        }
    }
    let outcomes = runtime(run_suites(seed, cfg.suite.as_deref()))?;
    println!("{:<20} {:<6} {:>6} {:>12}  detail", "suite", "status", "cases", "worst");
    for o in &outcomes {
        println!(
            "{:<20} {:<6} {:>6} {:>12.4e}  {}",
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.cases,
            o.worst,
            o.detail
        );
    }
    if outcomes.iter().all(|o| o.passed) {
        Ok(())
    } else {
        Err(Failure::Runtime("at least one suite failed".into()))
    }
}

pub fn run_certify(cfg: &ExperimentConfig) -> Outcome {
    let params = config(cfg.params())?;
    let spec = config(cfg.init_spectrum())?;
    let mut certs: Vec<BlowupCertificate> = vec![runtime(certify_blowup_f(&spec, &params))?];
    if let Some(InitSpec::Sine { amplitude }) = cfg.init {
        if amplitude > 0.0 {
            certs.push(runtime(corollary_condition(amplitude, &params))?);
        }
    }
    if let Some(choice) = cfg.attractor.as_ref().filter(|c| !c.is_f()) {
        let h = config(choice.build())?;
        certs.push(runtime(certify_blowup_h(&spec, &h, &params))?);
    }
    let json = runtime(serde_json::to_string_pretty(&certs))?;
    if let Some(out) = &cfg.out {
        write_file(&out.join("certificates.json"), &json)?;
    }
    println!("{json}");
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SweepCell {
    alpha: f64,
    nu: f64,
    #[serde(rename = "R")]
    amplitude: f64,
    certificate: Option<BlowupCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(rename = "detected_T")]
    detected_t: Option<f64>,
}

fn optional(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Outcome {
    let alphas = cfg.alphas.clone().or_else(|| cfg.alpha.map(|a| vec![a])).unwrap_or_default();
    let nus = cfg.nus.clone().or_else(|| cfg.nu.map(|n| vec![n])).unwrap_or_default();
    let amps = cfg
        .amplitudes
        .clone()
        .or_else(|| match cfg.init {
            Some(InitSpec::Sine { amplitude }) => Some(vec![amplitude]),
            _ => None,
        })
        .unwrap_or_default();
    let mut cells = Vec::new();
    for &a in &alphas {
        for &n in &nus {
            for &r in &amps {
                cells.push((a, n, r));
            }
        }
    }
    if cells.is_empty() {
        return Err(Failure::Config("empty sweep grid; give --alphas, --nus and --amplitudes".into()));
    }
    for &(a, n, r) in &cells {
        config(ModelParams::new(a, n).map(|_| ()).map_err(|e| e.to_string()))?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Failure::Config(format!("amplitude {r} must be positive")));
        }
    }
    let simulate = cfg.simulate.unwrap_or(false);
    let sim_base = if simulate {
        let mut base = cfg.clone();
        base.alpha = Some(alphas[0]);
        base.nu = Some(nus[0]);
        base.init = Some(InitSpec::Sine { amplitude: amps[0] });
        Some(simulation_setup(&base)?)
    } else {
        None
    };
    let out = cfg.out_dir();
    let cell_dir = out.join("cells");
    runtime(fs::create_dir_all(&cell_dir))?;

    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    let pool = runtime(rayon::ThreadPoolBuilder::new().num_threads(threads).build())?;
    let results: Vec<Result<SweepCell, Failure>> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, &(alpha, nu, amplitude))| {
                let p = ModelParams::new(alpha, nu).expect("validated above");
                let (certificate, error) = match corollary_condition(amplitude, &p) {
                    Ok(c) => (Some(c), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                let stem = format!("cell_{i:04}");
                let detected_t = match &sim_base {
                    Some(base) => {
                        let spec = runtime(SineSpectrum::sine(amplitude, base.spec.modes()))?;
                        let record = runtime(evolve(&spec, &p, base.t_end, base.dt, &base.evolve))?;
                        runtime(record.write(&cell_dir, &format!("{stem}_run")))?;
                        record.metadata().detection_time
                    }
                    None => None,
                };
                let cell = SweepCell { alpha, nu, amplitude, certificate, error, detected_t };
                write_file(&cell_dir.join(format!("{stem}.json")), &runtime(serde_json::to_string_pretty(&cell))?)?;
                Ok(cell)
            })
            .collect()
    });

    let mut csv = String::from("alpha,nu,R,margin,bound_T,detected_T\n");
    for res in results {
        let c = res?;
        let margin = c.certificate.as_ref().map(|k| k.margin).filter(|m| m.is_finite());
        let bound = c.certificate.as_ref().and_then(|k| k.predicted_bound_t);
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            format_float(c.alpha),
            format_float(c.nu),
            format_float(c.amplitude),
            optional(margin),
            optional(bound),
            optional(c.detected_t)
        )
        .unwrap();
    }
    write_file(&out.join("sweep.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

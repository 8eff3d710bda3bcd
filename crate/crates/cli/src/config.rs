//! Flat JSON experiment configuration. Command-line flags override file values.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use burgers_lab::attractors::{make_f, make_phi, make_sawtooth, read_attractor, AttractorFn};
use burgers_lab::dynamics::{Kernel, ModelParams};
use burgers_lab::spectral::read_spectrum;
use burgers_lab::SineSpectrum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Inviscid,
    Verify,
    Certify,
    Sweep,
}

/// `sine:R` or `file:PATH`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitSpec {
    Sine {
        #[serde(rename = "R")]
        amplitude: f64,
    },
    File {
        path: PathBuf,
    },
}

impl FromStr for InitSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            Some(("sine", r)) => r
                .parse()
                .map(|amplitude| InitSpec::Sine { amplitude })
                .map_err(|_| format!("bad amplitude in --init {s}")),
            Some(("file", p)) if !p.is_empty() => Ok(InitSpec::File { path: p.into() }),
            _ => Err(format!("--init expects sine:R or file:PATH, got {s}")),
        }
    }
}

impl InitSpec {
    pub fn spectrum(&self, modes: Option<usize>) -> Result<SineSpectrum, String> {
        match self {
            InitSpec::Sine { amplitude } => {
                SineSpectrum::sine(*amplitude, modes.unwrap_or(1)).map_err(|e| e.to_string())
            }
            InitSpec::File { path } => {
                let spec = read_spectrum(path).map_err(|e| format!("{}: {e}", path.display()))?;
                match modes {
                    Some(n) if n != spec.modes() => spec.resized(n).map_err(|e| e.to_string()),
                    _ => Ok(spec),
                }
            }
        }
    }
}

/// `F`, `phi`, `sawtooth` or `file:PATH`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AttractorChoice {
    F,
    Phi,
    Sawtooth,
    File(PathBuf),
}

impl FromStr for AttractorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "F" => Ok(AttractorChoice::F),
            "phi" | "Phi" => Ok(AttractorChoice::Phi),
            "sawtooth" => Ok(AttractorChoice::Sawtooth),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(AttractorChoice::File(p.into())),
                _ => Err(format!("--attractor expects F, phi, sawtooth or file:PATH, got {s}")),
            },
        }
    }
}

impl TryFrom<String> for AttractorChoice {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<AttractorChoice> for String {
    fn from(a: AttractorChoice) -> String {
        a.to_string()
    }
}

impl fmt::Display for AttractorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttractorChoice::F => write!(f, "F"),
            AttractorChoice::Phi => write!(f, "phi"),
            AttractorChoice::Sawtooth => write!(f, "sawtooth"),
            AttractorChoice::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl AttractorChoice {
    pub fn build(&self) -> Result<AttractorFn, String> {
        match self {
            AttractorChoice::F => Ok(make_f()),
            AttractorChoice::Phi => Ok(make_phi()),
            AttractorChoice::Sawtooth => Ok(make_sawtooth()),
            AttractorChoice::File(p) => read_attractor(p).map_err(|e| format!("{}: {e}", p.display())),
        }
    }

    pub fn is_f(&self) -> bool {
        matches!(self, AttractorChoice::F)
    }
}

/// `auto` (the optimal `r₀`) or an explicit positive scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Value", into = "serde_json::Value")]
pub enum RChoice {
    Auto,
    Value(f64),
}

impl FromStr for RChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(RChoice::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(RChoice::Value(v)),
            _ => Err(format!("--r expects auto or a positive real, got {s}")),
        }
    }
}

impl TryFrom<serde_json::Value> for RChoice {
    type Error = String;
    fn try_from(v: serde_json::Value) -> Result<Self, String> {
        match v {
            serde_json::Value::String(s) => s.parse(),
            serde_json::Value::Number(n) => n.as_f64().ok_or("bad r".to_string())?.to_string().parse(),
            other => Err(format!("r must be \"auto\" or a number, got {other}")),
        }
    }
}

impl From<RChoice> for serde_json::Value {
    fn from(r: RChoice) -> Self {
        match r {
            RChoice::Auto => serde_json::Value::String("auto".into()),
            RChoice::Value(v) => serde_json::json!(v),
        }
    }
}

/// Every field is optional so that files and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Kernel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attractor: Option<AttractorChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<RChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: ExperimentConfig) -> Self {
        overlay!(self, top; mode, alpha, nu, init, modes, dt, t_end, grid_size, stride, kernel, attractor, r, out,
            seed, samples, certify, suite, alphas, nus, amplitudes, simulate);
        self
    }

    pub fn params(&self) -> Result<ModelParams, String> {
        let nu = self.nu.ok_or("missing --nu")?;
        // alpha is irrelevant without dissipation
        let alpha = match self.alpha {
            Some(a) => a,
            None if nu == 0.0 => 1.0,
            None => return Err("missing --alpha".into()),
        };
        ModelParams::new(alpha, nu).map_err(|e| e.to_string())
    }

    pub fn require_positive(&self, name: &str, v: Option<f64>) -> Result<f64, String> {
        match v {
            Some(x) if x > 0.0 && x.is_finite() => Ok(x),
            Some(x) => Err(format!("--{name} must be positive, got {x}")),
            None => Err(format!("missing --{name}")),
        }
    }

    pub fn init_spectrum(&self) -> Result<SineSpectrum, String> {
        let init = self.init.as_ref().ok_or("missing --init")?;
        if self.modes == Some(0) {
            return Err("--modes must be positive".into());
        }
        init.spectrum(self.modes)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn attractor_or_f(&self) -> AttractorChoice {
        self.attractor.clone().unwrap_or(AttractorChoice::F)
    }
}

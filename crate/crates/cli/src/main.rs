//! Command-line driver for the Burgers laboratory.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use burgers_lab::dynamics::Kernel;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Failure;
use crate::config::{AttractorChoice, ExperimentConfig, InitSpec, Mode, RChoice};

#[derive(Parser)]
#[command(name = "burgers-lab", version, about = "Odd solutions of the inviscid and fractal Burgers equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March a truncated sine spectrum in time and write diagnostics.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the supercritical blowup certificate.
        #[arg(long)]
        certify: bool,
    },
    /// Exact inviscid distance to the attractor via characteristics.
    Inviscid {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of positive sample times up to --t-end.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the seeded invariant suites.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        suite: Option<String>,
    },
    /// Print blowup certificates for the given data.
    Certify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Certificates (and optionally simulations) over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        nus: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        amplitudes: Option<Vec<f64>>,
        /// Run a simulation per cell and record the detection time.
        #[arg(long)]
        simulate: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Direct,
    Pseudospectral,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    /// sine:R or file:PATH
    #[arg(long)]
    init: Option<InitSpec>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long = "grid-size")]
    grid_size: Option<usize>,
    /// F, phi, sawtooth or file:PATH
    #[arg(long)]
    attractor: Option<AttractorChoice>,
    /// auto or a positive real
    #[arg(long)]
    r: Option<RChoice>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Diagnostic row every this many steps.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
}

impl CommonArgs {
    fn into_config(self, mode: Mode) -> Result<ExperimentConfig, Failure> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(Failure::Config)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            mode: Some(mode),
            alpha: self.alpha,
            nu: self.nu,
            init: self.init,
            modes: self.modes,
            dt: self.dt,
            t_end: self.t_end,
            grid_size: self.grid_size,
            stride: self.stride,
            kernel: self.kernel.map(|k| match k {
                KernelArg::Direct => Kernel::Direct,
                KernelArg::Pseudospectral => Kernel::Pseudospectral,
            }),
            attractor: self.attractor,
            r: self.r,
            out: self.out,
            seed: self.seed,
            ..Default::default()
        };
        Ok(base.overlay(flags))
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { common, certify } => {
            let mut cfg = common.into_config(Mode::Simulate)?;
            if certify {
                cfg.certify = Some(true);
            }
            commands::run_simulate(&cfg)
        }
        Command::Inviscid { common, samples } => {
            let mut cfg = common.into_config(Mode::Inviscid)?;
            cfg.samples = samples.or(cfg.samples);
            commands::run_inviscid(&cfg)
        }
        Command::Verify { common, suite } => {
            let mut cfg = common.into_config(Mode::Verify)?;
            cfg.suite = suite.or(cfg.suite);
            commands::run_verify(&cfg)
        }
        Command::Certify { common } => commands::run_certify(&common.into_config(Mode::Certify)?),
        Command::Sweep { common, alphas, nus, amplitudes, simulate } => {
            let mut cfg = common.into_config(Mode::Sweep)?;
            cfg.alphas = alphas.or(cfg.alphas);
            cfg.nus = nus.or(cfg.nus);
            cfg.amplitudes = amplitudes.or(cfg.amplitudes);
            if simulate {
                cfg.simulate = Some(true);
            }
            commands::run_sweep(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

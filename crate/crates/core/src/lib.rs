//! Odd solutions of the inviscid and fractal Burgers equations on the torus.
//!
//! The equation is `∂ₜu + u∂ₓu + ν(-Δ)ᵅu = 0` for `x ∈ [-π, π)`. Odd data
//! stays odd, so fields are carried as sine spectra `u = -2 Σ ψ_n sin(nx)`.
//!
//! * [`spectral`]: sine spectra, grid samples, transforms and norms.
//! * [`dynamics`]: Galerkin right-hand sides, time stepping, diagnostics.
//! * [`inviscid`]: exact solutions by characteristics before the first shock.
//! * [`attractors`]: odd attractor profiles and the distance law.
//! * [`blowup`]: supercritical blowup certificates and detection.
//! * [`verify`]: seeded invariant suites.

pub mod attractors;
pub mod blowup;
pub mod dynamics;
pub mod error;
pub mod inviscid;
pub mod numerics;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use attractors::{make_f, make_phi, make_sawtooth, AttractorFn, OddProfile};
pub use blowup::BlowupCertificate;
pub use dynamics::{evolve, EvolveConfig, ModelParams, SimulationRecord};
pub use error::{Error, Result};
pub use inviscid::{Characteristics, InitialField};
pub use spectral::{GridFunction, SineSpectrum};

//! Conversion of phase to amplitude fluctuations of a bright beam by an
//! optical cavity.
//!
//! A beam reflected near a cavity resonance picks up detuning-dependent
//! phases on its carrier and on its noise sidebands. The carrier acts as a
//! local oscillator, so the relative phase rotates the noise ellipse and a
//! photodetector on the reflected beam sees a mix of the incident amplitude
//! and phase noise.
//!
//! - [`cavity`]: two-mirror reflection and transmission, finesse, reflection phase.
//! - [`quadrature`]: transfer coefficients, reflected noise spectrum, rotation angle.
//! - [`analysis`]: detuning sweeps, zero-derivative detunings, conversion threshold.
//! - [`oracle`]: seeded Monte Carlo estimate of the same spectrum.
//!
//! All detunings and analysis frequencies are in units of the cavity
//! bandwidth. Noise powers are relative to shot noise.

pub mod analysis;
pub mod cavity;
mod error;
pub mod oracle;
mod par;
pub mod quadrature;

pub use cavity::{
    finesse, CavityParams, ComplexResponse, MirrorPair, PhysicalScale, ResponseModel,
};
pub use error::{Error, Result};
pub use par::is_parallel;
pub use quadrature::{
    homodyne_reference, reflected_noise, rotation_angle, transfer_coefficients, RotationAngle,
    SidebandState, TransferCoefficients,
};

//! Two-mirror cavity response.
//!
//! Detunings are expressed in units of the cavity bandwidth, so the exact
//! Airy response is periodic with period equal to the finesse. Losses are
//! carried by the output mirror's transmission `T2 = 1 - R2`.
//!
//! The mirror algebra is written in terms of `1 - r1 r2` and `r1 - r2`
//! computed from the transmissions, which keeps `|r|^2 + |t|^2 = 1` at
//! machine precision even for very high finesse.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reflected amplitudes at or below this magnitude carry no usable phase.
pub const CARRIER_EPSILON: f64 = 1e-12;

/// Smallest admissible `|1 - r1 r2 exp(i phi)|`.
pub const DENOMINATOR_EPSILON: f64 = 1e-14;

/// Intensity reflectivities and transmissions of the two cavity mirrors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorPair {
    r1: f64,
    t1: f64,
    r2: f64,
    t2: f64,
}

impl MirrorPair {
    /// Builds a pair from the two intensity reflectivities.
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        check_unit("R1", r1)?;
        check_unit("R2", r2)?;
        Ok(Self {
            r1,
            t1: 1.0 - r1,
            r2,
            t2: 1.0 - r2,
        })
    }

    /// Builds a pair from the coupling reflectivity and the output-mirror
    /// transmission (the spurious loss).
    pub fn from_loss(r1: f64, t2: f64) -> Result<Self> {
        check_unit("R1", r1)?;
        check_unit("T2", t2)?;
        Ok(Self {
            r1,
            t1: 1.0 - r1,
            r2: 1.0 - t2,
            t2,
        })
    }

    pub fn lossless(r1: f64) -> Result<Self> {
        Self::from_loss(r1, 0.0)
    }

    /// Coupling mirror intensity reflectivity `R1`.
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// Output mirror intensity reflectivity `R2`.
    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// Coupling mirror intensity transmission `T1 = 1 - R1`.
    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Output mirror intensity transmission `T2 = 1 - R2`.
    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn is_lossless(&self) -> bool {
        self.t2 == 0.0
    }

    /// `1 - R1 R2`, evaluated without cancellation.
    fn one_minus_product(&self) -> f64 {
        self.t1 + self.r1 * self.t2
    }
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} = {value} must lie in [0, 1]"
        )))
    }
}

/// Finesse `F = pi (R1 R2)^(1/4) / (1 - sqrt(R1 R2))`.
pub fn finesse(mirrors: &MirrorPair) -> Result<f64> {
    let product = mirrors.r1 * mirrors.r2;
    if product >= 1.0 - f64::EPSILON {
        return Err(Error::DegenerateCavity { product });
    }
    let root = product.sqrt();
    let one_minus_root = mirrors.one_minus_product() / (1.0 + root);
    Ok(PI * root.sqrt() / one_minus_root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseModel {
    /// Full multiple-round-trip (Airy) response.
    #[default]
    ExactAiry,
    /// Single-resonance high-finesse limit.
    Lorentzian,
}

impl ResponseModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResponseModel::ExactAiry => "exact-airy",
            ResponseModel::Lorentzian => "lorentzian",
        }
    }
}

impl fmt::Display for ResponseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResponseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-airy" | "exact" | "airy" => Ok(ResponseModel::ExactAiry),
            "lorentzian" | "lorentz" => Ok(ResponseModel::Lorentzian),
            other => Err(Error::invalid(format!(
                "unknown response model {other:?} (expected exact-airy or lorentzian)"
            ))),
        }
    }
}

/// Optional physical units. Only used to convert normalized quantities
/// back to hertz; none of the cavity math depends on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScale {
    /// Round-trip length in meters.
    pub round_trip_length: f64,
    /// Speed of light in m/s.
    pub speed_of_light: f64,
}

impl PhysicalScale {
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

    pub fn new(round_trip_length: f64) -> Self {
        Self {
            round_trip_length,
            speed_of_light: Self::SPEED_OF_LIGHT,
        }
    }
}

/// A complex amplitude coefficient together with its squared modulus and
/// principal argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResponse {
    pub value: Complex64,
    pub magnitude_sq: f64,
    pub phase: f64,
}

impl ComplexResponse {
    pub fn new(value: Complex64) -> Self {
        Self {
            value,
            magnitude_sq: value.norm_sqr(),
            phase: value.arg(),
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }
}

/// A validated cavity with its derived constants cached.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityParams {
    mirrors: MirrorPair,
    model: ResponseModel,
    scale: Option<PhysicalScale>,
    finesse: f64,
    amp_r1: f64,
    amp_r2: f64,
    /// t1 t2
    amp_t1t2: f64,
    /// r1 r2
    round_trip: f64,
    /// 1 - r1 r2
    one_minus_rt: f64,
    /// r1 - r2
    r1_minus_r2: f64,
}

impl CavityParams {
    pub fn new(mirrors: MirrorPair, model: ResponseModel) -> Result<Self> {
        let finesse = finesse(&mirrors)?;
        let amp_r1 = mirrors.r1.sqrt();
        let amp_r2 = mirrors.r2.sqrt();
        let round_trip = amp_r1 * amp_r2;
        let one_minus_rt = mirrors.one_minus_product() / (1.0 + round_trip);
        let sum = amp_r1 + amp_r2;
        let r1_minus_r2 = if sum > 0.0 {
            (mirrors.t2 - mirrors.t1) / sum
        } else {
            0.0
        };
        Ok(Self {
            mirrors,
            model,
            scale: None,
            finesse,
            amp_r1,
            amp_r2,
            amp_t1t2: (mirrors.t1 * mirrors.t2).sqrt(),
            round_trip,
            one_minus_rt,
            r1_minus_r2,
        })
    }

    /// Exact-Airy cavity from `R1` and loss `T2`.
    pub fn from_loss(r1: f64, t2: f64) -> Result<Self> {
        Self::new(MirrorPair::from_loss(r1, t2)?, ResponseModel::ExactAiry)
    }

    pub fn with_model(mut self, model: ResponseModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_scale(mut self, scale: PhysicalScale) -> Result<Self> {
        let fsr = scale.speed_of_light / scale.round_trip_length;
        if !(fsr.is_finite() && fsr > 0.0) {
            return Err(Error::invalid(format!(
                "free spectral range c/L = {fsr} must be positive"
            )));
        }
        self.scale = Some(scale);
        Ok(self)
    }

    pub fn mirrors(&self) -> &MirrorPair {
        &self.mirrors
    }

    pub fn model(&self) -> ResponseModel {
        self.model
    }

    pub fn finesse(&self) -> f64 {
        self.finesse
    }

    pub fn is_lossless(&self) -> bool {
        self.mirrors.is_lossless()
    }

    /// Free spectral range `c / L` in Hz, when a physical scale is attached.
    pub fn free_spectral_range(&self) -> Option<f64> {
        self.scale.map(|s| s.speed_of_light / s.round_trip_length)
    }

    /// Resonance bandwidth (FWHM) `FSR / F` in Hz.
    pub fn bandwidth(&self) -> Option<f64> {
        self.free_spectral_range().map(|fsr| fsr / self.finesse)
    }

    /// Largest admissible `|detuning|`: half a free spectral range, `F / 2`.
    pub fn detuning_limit(&self) -> f64 {
        self.finesse / 2.0
    }

    pub fn check_domain(&self, detuning: f64) -> Result<()> {
        let limit = self.detuning_limit();
        if detuning.is_finite() && detuning.abs() <= limit {
            Ok(())
        } else {
            Err(Error::OutOfDomain { detuning, limit })
        }
    }

    /// Round-trip phase `2 pi detuning / F`.
    fn round_trip_phase(&self, detuning: f64) -> f64 {
        2.0 * PI * detuning / self.finesse
    }

    /// Reflection and transmission amplitudes sharing one denominator.
    pub(crate) fn amplitudes(&self, detuning: f64) -> Result<(Complex64, Complex64)> {
        if !detuning.is_finite() {
            return Err(Error::invalid(format!("detuning {detuning} is not finite")));
        }
        match self.model {
            ResponseModel::ExactAiry => self.airy(detuning),
            ResponseModel::Lorentzian => Ok(self.lorentzian(detuning)),
        }
    }

    fn airy(&self, detuning: f64) -> Result<(Complex64, Complex64)> {
        if self.round_trip == 0.0 {
            // No return path: the response does not depend on detuning.
            return Ok((
                Complex64::new(self.amp_r1 - self.amp_r2, 0.0),
                Complex64::new(self.amp_t1t2, 0.0),
            ));
        }
        let phi = self.round_trip_phase(detuning);
        let (sin_phi, _) = phi.sin_cos();
        let half = (phi / 2.0).sin();
        let hav = 2.0 * half * half; // 1 - cos(phi)

        let den = Complex64::new(
            self.one_minus_rt + self.round_trip * hav,
            -self.round_trip * sin_phi,
        );
        if den.norm() < DENOMINATOR_EPSILON {
            return Err(Error::numerical(format!(
                "cavity denominator vanishes at detuning {detuning}"
            )));
        }
        let num = Complex64::new(self.r1_minus_r2 + self.amp_r2 * hav, -self.amp_r2 * sin_phi);
        let r = num / den;
        let t = Complex64::from_polar(self.amp_t1t2, phi / 2.0) / den;
        Ok((r, t))
    }

    fn lorentzian(&self, detuning: f64) -> (Complex64, Complex64) {
        let a0 = self.r1_minus_r2 / self.one_minus_rt;
        let den = Complex64::new(1.0, -2.0 * detuning);
        let r = Complex64::new(a0, -2.0 * detuning) / den;
        let t = Complex64::new(self.amp_t1t2 / self.one_minus_rt, 0.0) / den;
        (r, t)
    }

    /// Amplitude reflection coefficient `r(detuning)`.
    pub fn amplitude_reflectance(&self, detuning: f64) -> Result<ComplexResponse> {
        self.amplitudes(detuning)
            .map(|(r, _)| ComplexResponse::new(r))
    }

    /// Amplitude transmission coefficient `t(detuning)`.
    pub fn amplitude_transmittance(&self, detuning: f64) -> Result<ComplexResponse> {
        self.amplitudes(detuning)
            .map(|(_, t)| ComplexResponse::new(t))
    }

    /// Continuous reflection phase `theta_R`.
    ///
    /// The branch starts at 0 half a free spectral range below resonance.
    /// For `r2 >= r1` it passes through `pi` on resonance and ends at `2 pi`;
    /// an undercoupled cavity returns to 0 instead.
    pub fn reflection_phase(&self, detuning: f64) -> Result<f64> {
        let (r, _) = self.amplitudes(detuning)?;
        let magnitude = r.norm();
        if magnitude <= CARRIER_EPSILON {
            return Err(Error::CarrierExtinguished {
                detuning,
                magnitude,
            });
        }
        Ok(self.unwrapped_phase(detuning))
    }

    fn unwrapped_phase(&self, detuning: f64) -> f64 {
        let overcoupled = self.amp_r2 >= self.amp_r1;
        match self.model {
            ResponseModel::Lorentzian => {
                let a0 = self.r1_minus_r2 / self.one_minus_rt;
                let x = 2.0 * detuning;
                if overcoupled {
                    PI + x.atan2(-a0) + x.atan()
                } else {
                    (-x).atan2(a0) + x.atan()
                }
            }
            ResponseModel::ExactAiry => {
                if self.round_trip == 0.0 {
                    return if overcoupled { PI } else { 0.0 };
                }
                let phi = self.round_trip_phase(detuning);
                let sin_phi = phi.sin();
                let half = (phi / 2.0).sin();
                let hav = 2.0 * half * half;
                // The denominator has a positive real part, so its principal
                // argument is already continuous.
                let den_arg =
                    (-self.round_trip * sin_phi).atan2(self.one_minus_rt + self.round_trip * hav);
                if overcoupled {
                    // r1 - r2 e^{i phi} = -r2 e^{i phi} (1 - rho e^{-i phi}), rho = r1 / r2
                    let rho = self.amp_r1 / self.amp_r2;
                    let one_minus_rho = -self.r1_minus_r2 / self.amp_r2;
                    let arg = (rho * sin_phi).atan2(one_minus_rho + rho * hav);
                    PI + phi + arg - den_arg
                } else {
                    // r1 - r2 e^{i phi} = r1 (1 - rho e^{i phi}), rho = r2 / r1
                    let rho = self.amp_r2 / self.amp_r1;
                    let one_minus_rho = self.r1_minus_r2 / self.amp_r1;
                    let arg = (-rho * sin_phi).atan2(one_minus_rho + rho * hav);
                    arg - den_arg
                }
            }
        }
    }
}

/// Removes `2 pi` jumps larger than `pi` between consecutive samples.
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phases {
        if let Some(q) = prev {
            let mut d = p - q;
            while d > PI {
                offset -= 2.0 * PI;
                d -= 2.0 * PI;
            }
            while d < -PI {
                offset += 2.0 * PI;
                d += 2.0 * PI;
            }
        }
        out.push(p + offset);
        prev = Some(p);
    }
    out
}

//! Quadrature transfer through the cavity on reflection.
//!
//! The reflected carrier acts as the local oscillator: its phase
//! `theta_R(detuning)` sets which combination of the input amplitude and
//! phase quadratures ends up in the reflected amplitude quadrature.
//! Vacuum entering through the lossy output mirror adds the `g_vp` and
//! `g_vq` terms.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::cavity::CavityParams;
use crate::error::{Error, Result};

/// Second-moment description of the sideband noise at one analysis frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandState {
    /// Amplitude-quadrature noise power (shot noise = 1).
    pub sp: f64,
    /// Phase-quadrature noise power (shot noise = 1).
    pub sq: f64,
    /// Ellipse orientation relative to the mean field, in radians.
    pub beta: f64,
    /// Analysis frequency in units of the cavity bandwidth.
    pub nu: f64,
}

impl SidebandState {
    /// Heisenberg slack for states built from rounded decimal inputs.
    const UNCERTAINTY_SLACK: f64 = 1e-12;

    /// A state aligned with the carrier (`beta = 0`).
    pub fn new(sp: f64, sq: f64, nu: f64) -> Result<Self> {
        let state = Self {
            sp,
            sq,
            beta: 0.0,
            nu,
        };
        state.validate()?;
        Ok(state)
    }

    /// Vacuum sidebands: shot noise in both quadratures.
    pub fn vacuum(nu: f64) -> Result<Self> {
        Self::new(1.0, 1.0, nu)
    }

    /// Same noise powers at another analysis frequency.
    pub fn with_nu(self, nu: f64) -> Result<Self> {
        let state = Self { nu, ..self };
        state.validate()?;
        Ok(state)
    }

    /// Rotated ellipse. Spectrum operations reject `beta != 0`.
    pub fn with_orientation(self, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::invalid(format!("beta = {beta} is not finite")));
        }
        Ok(Self { beta, ..self })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sp.is_finite() && self.sp > 0.0 && self.sq.is_finite() && self.sq > 0.0) {
            return Err(Error::invalid(format!(
                "noise powers must be positive (sp = {}, sq = {})",
                self.sp, self.sq
            )));
        }
        if self.sp * self.sq < 1.0 - Self::UNCERTAINTY_SLACK {
            return Err(Error::invalid(format!(
                "sp * sq = {} violates the uncertainty bound sp * sq >= 1",
                self.sp * self.sq
            )));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::invalid(format!(
                "analysis frequency nu = {} must be positive",
                self.nu
            )));
        }
        Ok(())
    }

    /// Validation plus the aligned-ellipse requirement of the spectrum.
    pub(crate) fn validate_aligned(&self) -> Result<()> {
        self.validate()?;
        if self.beta != 0.0 {
            return Err(Error::invalid(format!(
                "ellipse orientation beta = {} is not supported; the reflected spectrum assumes beta = 0",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn ellipse(&self) -> NoiseEllipse {
        let (sx, sy) = if self.sp <= self.sq {
            (self.sp, self.sq)
        } else {
            (self.sq, self.sp)
        };
        NoiseEllipse {
            sx,
            sy,
            orientation: self.beta,
        }
    }
}

/// Principal axes of the noise ellipse, `sx <= sy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEllipse {
    pub sx: f64,
    pub sy: f64,
    pub orientation: f64,
}

/// Weights of the input quadratures and the two vacuum quadratures in the
/// reflected amplitude quadrature:
/// `dp_R = g_p dp + i g_q dq + g_vp dp_v + i g_vq dq_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCoefficients {
    pub gp: Complex64,
    pub gq: Complex64,
    pub gvp: Complex64,
    pub gvq: Complex64,
}

impl TransferCoefficients {
    /// Sum of the four squared magnitudes; one for any cavity.
    pub fn total_weight(&self) -> f64 {
        self.gp.norm_sqr() + self.gq.norm_sqr() + self.gvp.norm_sqr() + self.gvq.norm_sqr()
    }

    /// Reflected amplitude noise for the given input quadrature powers.
    pub fn spectrum(&self, sp: f64, sq: f64) -> f64 {
        self.gp.norm_sqr() * sp
            + self.gq.norm_sqr() * sq
            + self.gvp.norm_sqr()
            + self.gvq.norm_sqr()
    }

    /// `atan2(|g_q|, |g_p|)`, in `[0, pi/2]`.
    pub fn magnitude_angle(&self) -> f64 {
        self.gq.norm().atan2(self.gp.norm())
    }
}

fn check_sidebands(detuning: f64, nu: f64, cavity: &CavityParams) -> Result<()> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::invalid(format!(
            "analysis frequency nu = {nu} must be positive"
        )));
    }
    cavity.check_domain(detuning)?;
    cavity.check_domain(detuning + nu)?;
    cavity.check_domain(detuning - nu)
}

fn coefficients_with_phase(
    detuning: f64,
    nu: f64,
    carrier_phase: f64,
    cavity: &CavityParams,
) -> Result<TransferCoefficients> {
    let (r_up, t_up) = cavity.amplitudes(detuning + nu)?;
    let (r_lo, t_lo) = cavity.amplitudes(detuning - nu)?;
    let lo = Complex64::from_polar(1.0, -carrier_phase);
    let a = lo * r_up;
    let b = (lo * r_lo).conj();
    let c = lo * t_up;
    let d = (lo * t_lo).conj();
    Ok(TransferCoefficients {
        gp: (a + b) * 0.5,
        gq: (a - b) * 0.5,
        gvp: (c + d) * 0.5,
        gvq: (c - d) * 0.5,
    })
}

/// The four transfer coefficients at `(detuning, nu)`.
pub fn transfer_coefficients(
    detuning: f64,
    nu: f64,
    cavity: &CavityParams,
) -> Result<TransferCoefficients> {
    check_sidebands(detuning, nu, cavity)?;
    let theta = cavity.reflection_phase(detuning)?;
    coefficients_with_phase(detuning, nu, theta, cavity)
}

/// Reflected amplitude-quadrature noise `S_R` at `state.nu`.
pub fn reflected_noise(detuning: f64, state: &SidebandState, cavity: &CavityParams) -> Result<f64> {
    state.validate_aligned()?;
    let g = transfer_coefficients(detuning, state.nu, cavity)?;
    Ok(g.spectrum(state.sp, state.sq))
}

/// Noise-ellipse rotation relative to the carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngle {
    /// `atan2(|g_q|, |g_p|)`, in `[0, pi/2]`.
    pub magnitude: f64,
    /// Carrier phase minus the mean sideband phase; zero far from resonance.
    pub signed: f64,
}

fn signed_rotation(
    detuning: f64,
    nu: f64,
    carrier_phase: f64,
    cavity: &CavityParams,
) -> Result<f64> {
    let upper = cavity.reflection_phase(detuning + nu)?;
    let lower = cavity.reflection_phase(detuning - nu)?;
    Ok(carrier_phase - 0.5 * (upper + lower))
}

pub fn rotation_angle(detuning: f64, nu: f64, cavity: &CavityParams) -> Result<RotationAngle> {
    check_sidebands(detuning, nu, cavity)?;
    let theta = cavity.reflection_phase(detuning)?;
    let g = coefficients_with_phase(detuning, nu, theta, cavity)?;
    Ok(RotationAngle {
        magnitude: g.magnitude_angle(),
        signed: signed_rotation(detuning, nu, theta, cavity)?,
    })
}

/// Everything known about one detuning, with `theta_R` evaluated once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePoint {
    pub detuning: f64,
    pub coefficients: TransferCoefficients,
    pub s_r: f64,
    pub rotation: RotationAngle,
    pub r_abs2: f64,
    pub theta_r: f64,
}

pub fn evaluate_point(
    detuning: f64,
    state: &SidebandState,
    cavity: &CavityParams,
) -> Result<NoisePoint> {
    state.validate_aligned()?;
    check_sidebands(detuning, state.nu, cavity)?;
    let theta = cavity.reflection_phase(detuning)?;
    let g = coefficients_with_phase(detuning, state.nu, theta, cavity)?;
    let signed = signed_rotation(detuning, state.nu, theta, cavity)?;
    let r_abs2 = cavity.amplitude_reflectance(detuning)?.magnitude_sq;
    Ok(NoisePoint {
        detuning,
        coefficients: g,
        s_r: g.spectrum(state.sp, state.sq),
        rotation: RotationAngle {
            magnitude: g.magnitude_angle(),
            signed,
        },
        r_abs2,
        theta_r: theta,
    })
}

/// Ideal balanced-homodyne spectrum at local-oscillator phase `theta_lo`.
pub fn homodyne_reference(theta_lo: f64, state: &SidebandState) -> f64 {
    let (s, c) = theta_lo.sin_cos();
    c * c * state.sp + s * s * state.sq
}

/// Complex amplitude and phase quadrature components at one analysis
/// frequency, with the carrier as phase reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePair {
    pub dp: Complex64,
    pub dq: Complex64,
}

impl QuadraturePair {
    pub fn new(dp: Complex64, dq: Complex64) -> Self {
        Self { dp, dq }
    }

    /// `(delta_alpha(nu), delta_alpha*(-nu))`.
    pub fn to_sidebands(self) -> (Complex64, Complex64) {
        let i = Complex64::i();
        ((self.dp + i * self.dq) * 0.5, (self.dp - i * self.dq) * 0.5)
    }

    pub fn from_sidebands(upper: Complex64, lower_conj: Complex64) -> Self {
        Self {
            dp: upper + lower_conj,
            dq: -Complex64::i() * (upper - lower_conj),
        }
    }
}

/// Shifts the upper sideband by `theta`. At `theta = pi` the amplitude
/// quadrature reads the phase quadrature, up to a global phase.
pub fn apply_sideband_phase(theta: f64, pair: QuadraturePair) -> QuadraturePair {
    let (upper, lower) = pair.to_sidebands();
    QuadraturePair::from_sidebands(Complex64::from_polar(1.0, theta) * upper, lower)
}

/// Shifts the carrier (local oscillator) by `theta`. At `theta = pi/2` the
/// amplitude quadrature reads the phase quadrature.
pub fn apply_carrier_phase(theta: f64, pair: QuadraturePair) -> QuadraturePair {
    let (upper, lower) = pair.to_sidebands();
    let shift = Complex64::from_polar(1.0, -theta);
    let i = Complex64::i();
    QuadraturePair {
        dp: shift * upper + shift.conj() * lower,
        dq: -i * (shift * upper - shift.conj() * lower),
    }
}

/// Angle at which conversion is complete.
pub const FULL_CONVERSION: f64 = FRAC_PI_2;

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::cavity::{MirrorPair, ResponseModel};

    fn fig7_cavity() -> CavityParams {
        CavityParams::from_loss(0.95, 0.003).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn state_validation() {
        assert!(SidebandState::new(0.5, 2.0, 6.0).is_ok());
        assert!(SidebandState::new(0.5, 1.5, 6.0).is_err());
        assert!(SidebandState::new(-1.0, -1.0, 6.0).is_err());
        assert!(SidebandState::new(1.0, 1.0, 0.0).is_err());
        let rotated = SidebandState::new(0.5, 2.0, 6.0)
            .unwrap()
            .with_orientation(0.3)
            .unwrap();
        assert!(reflected_noise(0.0, &rotated, &fig7_cavity()).is_err());
    }

    #[test]
    fn ellipse_axes_sorted() {
        let e = SidebandState::new(3.0, 0.5, 1.0).unwrap().ellipse();
        assert_eq!((e.sx, e.sy), (0.5, 3.0));
        assert!(e.sx * e.sy >= 1.0);
    }

    #[test]
    fn coefficients_match_high_precision_reference() {
        // |g_p|, |g_q|, |g_vp|, |g_vq| from a 40-digit evaluation of the
        // round-trip series propagated on quadrature basis vectors.
        type Case = (f64, f64, (f64, f64), [f64; 4]);
        let cases: [Case; 4] = [
            (
                0.0,
                6.0,
                (0.95, 0.997),
                [0.999_272_339_254_987_1, 0.0, 0.038_141_735_669_289_13, 0.0],
            ),
            (
                -6.0,
                6.0,
                (0.95, 0.997),
                [
                    0.123_812_149_606_828_6,
                    0.938_047_775_272_175_7,
                    0.226_232_881_544_087_3,
                    0.231_420_842_243_988_4,
                ],
            ),
            (
                -0.5,
                6.0,
                (0.95, 0.997),
                [
                    0.045_360_879_688_595_39,
                    0.998_227_280_594_001_6,
                    0.003_718_292_815_313_355,
                    0.038_351_807_914_631_06,
                ],
            ),
            (
                2.0,
                1.0,
                (0.99, 0.995),
                [
                    0.942_967_459_158_651_8,
                    0.099_964_021_487_344_69,
                    0.133_307_282_527_223_05,
                    0.288_181_772_152_857_05,
                ],
            ),
        ];
        for (d, nu, (r1, r2), expect) in cases {
            let cav = CavityParams::new(MirrorPair::new(r1, r2).unwrap(), ResponseModel::ExactAiry)
                .unwrap();
            let g = transfer_coefficients(d, nu, &cav).unwrap();
            let got = [g.gp.norm(), g.gq.norm(), g.gvp.norm(), g.gvq.norm()];
            for (a, b) in got.iter().zip(expect) {
                assert!((a - b).abs() < 1e-11, "({d}, {nu}): {got:?}");
            }
        }
    }

    #[test]
    fn far_from_resonance_is_transparent() {
        let cav = CavityParams::from_loss(0.99, 0.0).unwrap();
        let d = cav.finesse() / 4.0;
        for detuning in [-d, d] {
            let g = transfer_coefficients(detuning, 6.0, &cav).unwrap();
            assert!((g.gp.norm() - 1.0).abs() < 1e-6 && g.gq.norm() < 1e-3);
            let rot = rotation_angle(detuning, 6.0, &cav).unwrap();
            assert!(rot.magnitude < 1e-3 && rot.signed.abs() < 1e-3);
            let state = SidebandState::new(0.5, 2.0, 6.0).unwrap();
            assert!((reflected_noise(detuning, &state, &cav).unwrap() - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn carrier_resonance_restores_amplitude_noise() {
        let state = SidebandState::new(0.5, 2.0, 6.0).unwrap();
        let s = reflected_noise(0.0, &state, &fig7_cavity()).unwrap();
        assert!((s - 0.500_727_395_999_933).abs() < 1e-12, "{s}");
        assert!((s / 0.5 - 1.0).abs() < 0.01);
    }

    #[test]
    fn sideband_resonance_converts_quadratures() {
        let cav = CavityParams::from_loss(0.9999, 0.0).unwrap();
        let nu = 50.0;
        let g = transfer_coefficients(-nu, nu, &cav).unwrap();
        assert!(g.gp.norm() < 0.02, "{}", g.gp.norm());
        let rot = rotation_angle(-nu, nu, &cav).unwrap();
        assert!((rot.signed + FRAC_PI_2).abs() < 0.02);
    }

    #[test]
    fn signed_rotation_examples() {
        let cav = CavityParams::from_loss(0.999, 0.0).unwrap();
        let at = |d: f64| rotation_angle(d, 6.0, &cav).unwrap();
        assert!(at(0.0).signed.abs() < 1e-12);
        assert!((at(-0.5).signed + FRAC_PI_2).abs() < 0.02);
        for d in [0.3, 0.5, 2.0, 5.9, 9.0] {
            assert!((at(d).signed + at(-d).signed).abs() < 1e-9);
        }
    }

    #[test]
    fn extinguished_carrier_is_reported() {
        let cav = CavityParams::new(
            MirrorPair::new(0.97, 0.97).unwrap(),
            ResponseModel::ExactAiry,
        )
        .unwrap();
        assert!(matches!(
            transfer_coefficients(0.0, 3.0, &cav),
            Err(Error::CarrierExtinguished { .. })
        ));
    }

    #[test]
    fn sidebands_must_stay_in_domain() {
        let cav = fig7_cavity();
        let edge = cav.detuning_limit();
        assert!(matches!(
            transfer_coefficients(edge - 1.0, 6.0, &cav),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn homodyne_examples() {
        let state = SidebandState::new(0.5, 2.0, 1.0).unwrap();
        assert_eq!(homodyne_reference(0.0, &state), 0.5);
        assert!((homodyne_reference(FRAC_PI_2, &state) - 2.0).abs() < 1e-15);
        assert!((homodyne_reference(PI / 4.0, &state) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn sideband_phase_shift() {
        let pair = QuadraturePair::new(c(0.3, -1.1), c(0.7, 0.2));
        let same = apply_sideband_phase(0.0, pair);
        assert!((same.dp - pair.dp).norm() < 1e-15 && (same.dq - pair.dq).norm() < 1e-15);
        let full = apply_sideband_phase(2.0 * PI, pair);
        assert!((full.dp - pair.dp).norm() < 1e-14 && (full.dq - pair.dq).norm() < 1e-14);

        // A pure phase-quadrature input shows up in dp at theta = pi.
        let phase_only = QuadraturePair::new(c(0.0, 0.0), c(0.8, -0.4));
        let out = apply_sideband_phase(PI, phase_only);
        assert!((out.dp.norm() - phase_only.dq.norm()).abs() < 1e-15);
        assert!((out.dp - (-Complex64::i() * phase_only.dq)).norm() < 1e-15);
        // And a pure amplitude input leaves dp.
        let amp_only = QuadraturePair::new(c(0.8, -0.4), c(0.0, 0.0));
        assert!(apply_sideband_phase(PI, amp_only).dp.norm() < 1e-15);
    }

    #[test]
    fn carrier_phase_shift() {
        let pair = QuadraturePair::new(c(0.3, -1.1), c(0.7, 0.2));
        let out = apply_carrier_phase(FRAC_PI_2, pair);
        assert!((out.dp - pair.dq).norm() < 1e-15);
        let out = apply_carrier_phase(1.5 * PI, pair);
        assert!((out.dp + pair.dq).norm() < 1e-15);
        let out = apply_carrier_phase(0.0, pair);
        assert!((out.dp - pair.dp).norm() < 1e-15);
    }

    #[test]
    fn sideband_round_trip() {
        let pair = QuadraturePair::new(c(0.1, 0.2), c(-0.3, 0.4));
        let (u, l) = pair.to_sidebands();
        let back = QuadraturePair::from_sidebands(u, l);
        assert!((back.dp - pair.dp).norm() < 1e-15 && (back.dq - pair.dq).norm() < 1e-15);
    }

    #[test]
    fn losses_pull_sideband_peak_toward_shot_noise() {
        let state = SidebandState::new(0.5, 2.0, 6.0).unwrap();
        let lossy = fig7_cavity();
        let lossless = CavityParams::from_loss(0.95, 0.0).unwrap();
        let a = reflected_noise(-6.0, &state, &lossy).unwrap();
        let b = reflected_noise(-6.0, &state, &lossless).unwrap();
        assert!((a - 1.0).abs() < (b - 1.0).abs(), "{a} {b}");
    }
}

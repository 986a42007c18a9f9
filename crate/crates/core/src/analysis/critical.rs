//! Zero-derivative detunings of the reflected noise, the full-conversion
//! threshold in analysis frequency, and scans built on them.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;

use crate::cavity::{CavityParams, MirrorPair, ResponseModel};
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{reflected_noise, transfer_coefficients, SidebandState};

use super::search::{bisect, central_difference, golden_section_max};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriticalKind {
    /// The input phase quadrature is fully transferred to the amplitude quadrature.
    FullConversionMax,
    /// Extremum without complete conversion.
    PartialExtremum,
    /// Turning point lying between two other critical points.
    Inflection,
}

impl CriticalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriticalKind::FullConversionMax => "full-conversion-max",
            CriticalKind::PartialExtremum => "partial-extremum",
            CriticalKind::Inflection => "inflection",
        }
    }
}

impl fmt::Display for CriticalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub delta: f64,
    pub kind: CriticalKind,
    pub s_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSet {
    pub nu: f64,
    /// Sorted by detuning.
    pub points: Vec<CriticalPoint>,
}

impl CriticalSet {
    pub fn count(&self, kind: CriticalKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }

    pub fn full_conversions(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points
            .iter()
            .filter(|p| p.kind == CriticalKind::FullConversionMax)
    }
}

/// Tuning of the zero-derivative search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalSearch {
    /// Bisection tolerance in detuning.
    pub tol: f64,
    /// Bracketing grid size over `(0, domain_max]`.
    pub grid_points: usize,
    /// Upper end of the search; `max(3 nu, 5)` when unset.
    pub domain_max: Option<f64>,
    /// Central-difference step.
    pub derivative_step: f64,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            grid_points: 10_000,
            domain_max: None,
            derivative_step: 1e-6,
        }
    }
}

impl CriticalSearch {
    pub fn domain_max(&self, nu: f64) -> f64 {
        self.domain_max.unwrap_or_else(|| (3.0 * nu).max(5.0))
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid(format!(
                "tolerance {} must be positive",
                self.tol
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::invalid("bracketing grid needs at least 2 points"));
        }
        if !(self.derivative_step.is_finite() && self.derivative_step > 0.0) {
            return Err(Error::invalid("derivative step must be positive"));
        }
        if let Some(m) = self.domain_max {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::invalid(format!(
                    "search domain end {m} must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// Relative distance from `S_q` below which a lossless extremum counts as
/// full conversion.
pub const FULL_CONVERSION_TOL: f64 = 1e-6;

/// Half-width around `sqrt(2)` in which coalescing lossless roots are
/// reported as a single partial extremum.
pub const COALESCENCE_WINDOW: f64 = 0.005;

/// All `detuning > 0` where `dS_R/d(detuning)` vanishes, at `state.nu`.
pub fn find_critical_detunings(
    state: &SidebandState,
    cavity: &CavityParams,
    search: &CriticalSearch,
) -> Result<CriticalSet> {
    state.validate_aligned()?;
    search.validate()?;
    let nu = state.nu;
    let domain_max = search.domain_max(nu);
    let h = search.derivative_step;
    cavity.check_domain(domain_max + nu + h)?;

    if state.sp == state.sq {
        // S_R is flat; there is no structure to find.
        return Ok(CriticalSet {
            nu,
            points: Vec::new(),
        });
    }

    let noise = |d: f64| reflected_noise(d, state, cavity);
    let slope = |d: f64| central_difference(&noise, d, h);

    let n = search.grid_points;
    let grid: Vec<f64> = (1..=n).map(|k| domain_max * k as f64 / n as f64).collect();
    let slopes = par::map(&grid, |&d| slope(d))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;

    let mut brackets = Vec::new();
    for k in 0..n - 1 {
        let (a, b) = (slopes[k], slopes[k + 1]);
        if a == 0.0 {
            brackets.push((grid[k], grid[k], a));
        } else if (a > 0.0) != (b > 0.0) && b != 0.0 {
            brackets.push((grid[k], grid[k + 1], a));
        }
    }
    if slopes[n - 1] == 0.0 {
        brackets.push((grid[n - 1], grid[n - 1], 0.0));
    }
    if brackets.is_empty() {
        return Err(Error::numerical(format!(
            "no zero-derivative point found on (0, {domain_max}] at nu = {nu}"
        )));
    }

    let roots = par::map(&brackets, |&(lo, hi, flo)| {
        if lo == hi {
            Ok(lo)
        } else {
            bisect(&slope, lo, hi, flo, search.tol)
        }
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let lossless = cavity.is_lossless();
    let mut points = Vec::with_capacity(roots.len());
    for &delta in &roots {
        let g = transfer_coefficients(delta, nu, cavity)?;
        let s_r = g.spectrum(state.sp, state.sq);
        let full = if lossless {
            (s_r - state.sq).abs() <= FULL_CONVERSION_TOL * state.sq
        } else {
            let gp2 = g.gp.norm_sqr();
            gp2 <= FULL_CONVERSION_TOL * (gp2 + g.gq.norm_sqr())
        };
        let kind = if full {
            CriticalKind::FullConversionMax
        } else {
            CriticalKind::PartialExtremum
        };
        points.push(CriticalPoint { delta, kind, s_r });
    }

    let last = points.len().saturating_sub(1);
    for (i, p) in points.iter_mut().enumerate() {
        if p.kind != CriticalKind::FullConversionMax && i > 0 && i < last {
            p.kind = CriticalKind::Inflection;
        }
    }

    if lossless && (nu - SQRT_2).abs() <= COALESCENCE_WINDOW && points.len() > 1 {
        let keep = points
            .iter()
            .copied()
            .max_by(|a, b| {
                (a.s_r - state.sp)
                    .abs()
                    .total_cmp(&(b.s_r - state.sp).abs())
            })
            .expect("non-empty");
        points = vec![CriticalPoint {
            kind: CriticalKind::PartialExtremum,
            ..keep
        }];
    }

    Ok(CriticalSet { nu, points })
}

/// Options for the conversion-threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSearch {
    pub nu_lo: f64,
    pub nu_hi: f64,
    /// Bisection tolerance on `nu`.
    pub nu_tol: f64,
    /// How close to `pi/2` the best rotation must come.
    pub angle_tol: f64,
    /// Coarse grid before golden-section refinement.
    pub grid_points: usize,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        Self {
            nu_lo: 0.5,
            nu_hi: 3.0,
            nu_tol: 1e-7,
            angle_tol: 1e-8,
            grid_points: 2000,
        }
    }
}

/// Largest rotation magnitude over `detuning in (0, max(3 nu, 5)]`.
pub fn max_rotation(nu: f64, cavity: &CavityParams, grid_points: usize) -> Result<(f64, f64)> {
    let domain_max = (3.0 * nu).max(5.0);
    cavity.check_domain(domain_max + nu)?;
    let angle = |d: f64| transfer_coefficients(d, nu, cavity).map(|g| g.magnitude_angle());
    let step = domain_max / grid_points as f64;
    let grid: Vec<f64> = (1..=grid_points).map(|k| step * k as f64).collect();
    let values = par::map(&grid, |&d| angle(d))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let (k, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let lo = if k == 0 { step * 1e-3 } else { grid[k - 1] };
    let hi = grid[(k + 1).min(grid_points - 1)];
    let best = golden_section_max(&angle, lo, hi, 1e-13)?;
    Ok(if best.1 >= values[k] {
        best
    } else {
        (grid[k], values[k])
    })
}

/// Smallest analysis frequency at which complete phase-to-amplitude
/// conversion is reachable at some detuning.
pub fn conversion_threshold(cavity: &CavityParams, search: &ThresholdSearch) -> Result<f64> {
    let reaches = |nu: f64| -> Result<bool> {
        let (_, angle) = max_rotation(nu, cavity, search.grid_points)?;
        Ok(angle >= FRAC_PI_2 - search.angle_tol)
    };
    let (mut lo, mut hi) = (search.nu_lo, search.nu_hi);
    if !reaches(hi)? {
        return Err(Error::numerical(format!(
            "rotation never reaches pi/2 for nu <= {hi}; no threshold in the bracket"
        )));
    }
    if reaches(lo)? {
        return Err(Error::numerical(format!(
            "conversion is already complete at nu = {lo}; bracket does not straddle the threshold"
        )));
    }
    while hi - lo > search.nu_tol {
        let mid = 0.5 * (lo + hi);
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationSample {
    pub nu: f64,
    pub result: Result<CriticalSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationScan {
    pub samples: Vec<BifurcationSample>,
}

impl BifurcationScan {
    /// Carrier-rotation asymptote of the lower full-conversion branch.
    pub const CARRIER_ASYMPTOTE: f64 = 0.5;

    /// Sideband-rotation asymptote of the upper branch, `detuning = nu`.
    pub fn sideband_asymptote(nu: f64) -> f64 {
        nu
    }

    /// `(nu, number of critical points)` for every successful sample.
    pub fn branch_counts(&self) -> Vec<(f64, usize)> {
        self.samples
            .iter()
            .filter_map(|s| s.result.as_ref().ok().map(|c| (s.nu, c.points.len())))
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = (f64, &Error)> {
        self.samples
            .iter()
            .filter_map(|s| s.result.as_ref().err().map(|e| (s.nu, e)))
    }
}

/// Critical sets over `steps` evenly spaced analysis frequencies.
pub fn bifurcation_scan(
    nu_min: f64,
    nu_max: f64,
    steps: usize,
    state: &SidebandState,
    cavity: &CavityParams,
    search: &CriticalSearch,
) -> Result<BifurcationScan> {
    if !(nu_min > 0.0 && nu_max <= 20.0 && nu_min <= nu_max) {
        return Err(Error::invalid(format!(
            "analysis-frequency range [{nu_min}, {nu_max}] must lie within (0, 20]"
        )));
    }
    if steps == 0 || (steps == 1 && nu_min != nu_max) || (steps >= 2 && nu_min == nu_max) {
        return Err(Error::invalid(format!(
            "{steps} steps do not fit the range [{nu_min}, {nu_max}]"
        )));
    }
    let nus: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                nu_min
            } else if i + 1 == steps {
                nu_max
            } else {
                nu_min + (nu_max - nu_min) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let samples = par::map(&nus, |&nu| BifurcationSample {
        nu,
        result: state
            .with_nu(nu)
            .and_then(|s| find_critical_detunings(&s, cavity, search)),
    });
    Ok(BifurcationScan { samples })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatchingOutcome {
    /// Smallest detuning with a full conversion.
    Converts(f64),
    NoConversion,
    CarrierExtinguished,
    Failed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingRow {
    pub t2: f64,
    pub outcome: MatchingOutcome,
}

/// Smallest full-conversion detuning as the output-mirror loss `T2`
/// varies at fixed `R1`. Rows are sorted by `T2`.
pub fn matching_study(
    r1: f64,
    t2_values: &[f64],
    state: &SidebandState,
    model: ResponseModel,
    search: &CriticalSearch,
) -> Vec<MatchingRow> {
    let mut t2s = t2_values.to_vec();
    t2s.sort_by(f64::total_cmp);
    par::map(&t2s, |&t2| {
        let outcome = MirrorPair::from_loss(r1, t2)
            .and_then(|m| CavityParams::new(m, model))
            .and_then(|cav| find_critical_detunings(state, &cav, search));
        let outcome = match outcome {
            Ok(set) => match set.full_conversions().next() {
                Some(p) => MatchingOutcome::Converts(p.delta),
                None => MatchingOutcome::NoConversion,
            },
            Err(Error::CarrierExtinguished { .. }) => MatchingOutcome::CarrierExtinguished,
            Err(e) => MatchingOutcome::Failed(e),
        };
        MatchingRow { t2, outcome }
    })
}

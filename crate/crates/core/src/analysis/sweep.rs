use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{evaluate_point, NoisePoint, SidebandState};

/// Uniform grid of detunings, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl DetuningGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::invalid(format!(
                "detuning range [{min}, {max}] must be finite and increasing"
            )));
        }
        if points < 2 {
            return Err(Error::invalid(format!(
                "a sweep needs at least 2 points, got {points}"
            )));
        }
        Ok(Self { min, max, points })
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    /// Both ends must lie within half a free spectral range.
    pub fn check_domain(&self, cavity: &CavityParams) -> Result<()> {
        cavity.check_domain(self.min)?;
        cavity.check_domain(self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub s_r: f64,
    pub theta_signed: f64,
    pub theta_magnitude: f64,
    pub g_p_abs: f64,
    pub g_q_abs: f64,
    pub g_vp_abs: f64,
    pub g_vq_abs: f64,
    pub r_abs2: f64,
    pub theta_r: f64,
}

impl From<NoisePoint> for SweepRow {
    fn from(p: NoisePoint) -> Self {
        let g = p.coefficients;
        Self {
            delta: p.detuning,
            s_r: p.s_r,
            theta_signed: p.rotation.signed,
            theta_magnitude: p.rotation.magnitude,
            g_p_abs: g.gp.norm(),
            g_q_abs: g.gq.norm(),
            g_vp_abs: g.gvp.norm(),
            g_vq_abs: g.gvq.norm(),
            r_abs2: p.r_abs2,
            theta_r: p.theta_r,
        }
    }
}

/// Everything needed to regenerate a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetadata {
    pub cavity: CavityParams,
    pub state: SidebandState,
    pub grid: DetuningGrid,
    /// Grid points that produced no row, with the reason.
    pub excluded: Vec<(f64, Error)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSweep {
    pub grid: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

impl NoiseSweep {
    /// Rows strictly above both neighbours.
    pub fn local_maxima(&self) -> Vec<SweepRow> {
        self.rows
            .windows(3)
            .filter(|w| w[1].s_r > w[0].s_r && w[1].s_r > w[2].s_r)
            .map(|w| w[1])
            .collect()
    }
}

/// Reflected-noise profile over a uniform detuning grid.
///
/// Points where the carrier is extinguished or a sideband leaves the domain
/// are dropped and listed in the metadata.
pub fn detuning_sweep(
    grid: DetuningGrid,
    state: &SidebandState,
    cavity: &CavityParams,
) -> Result<NoiseSweep> {
    state.validate_aligned()?;
    grid.check_domain(cavity)?;
    let deltas = grid.values();
    let results = par::map(&deltas, |&d| evaluate_point(d, state, cavity));

    let mut rows = Vec::with_capacity(deltas.len());
    let mut excluded = Vec::new();
    for (d, res) in deltas.iter().zip(results) {
        match res {
            Ok(p) => rows.push(SweepRow::from(p)),
            Err(e) => excluded.push((*d, e)),
        }
    }
    Ok(NoiseSweep {
        grid: deltas,
        rows,
        metadata: SweepMetadata {
            cavity: cavity.clone(),
            state: *state,
            grid,
            excluded,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{MirrorPair, ResponseModel};

    fn fig7() -> (DetuningGrid, SidebandState, CavityParams) {
        (
            DetuningGrid::new(-12.0, 12.0, 2001).unwrap(),
            SidebandState::new(0.5, 2.0, 6.0).unwrap(),
            CavityParams::from_loss(0.95, 0.003).unwrap(),
        )
    }

    #[test]
    fn grid_is_strictly_increasing_with_exact_ends() {
        let g = DetuningGrid::new(-12.0, 12.0, 2001).unwrap();
        let v = g.values();
        assert_eq!(v[0], -12.0);
        assert_eq!(*v.last().unwrap(), 12.0);
        assert_eq!(v[1000], 0.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(DetuningGrid::new(1.0, 1.0, 10).is_err());
        assert!(DetuningGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn fig7_profile_has_four_peaks() {
        let (grid, state, cav) = fig7();
        let sweep = detuning_sweep(grid, &state, &cav).unwrap();
        assert_eq!(sweep.rows.len(), 2001);
        let peaks = sweep.local_maxima();
        assert_eq!(peaks.len(), 4, "{peaks:?}");
        assert!((peaks[1].delta + 0.5).abs() < 0.2 && (peaks[2].delta - 0.5).abs() < 0.2);
        assert!((peaks[0].delta + 6.0).abs() < 0.5 && (peaks[3].delta - 6.0).abs() < 0.5);
        let inner = peaks[1].s_r.min(peaks[2].s_r);
        let outer = peaks[0].s_r.max(peaks[3].s_r);
        assert!(inner > outer);
    }

    #[test]
    fn vacuum_sweep_is_flat() {
        let (grid, _, cav) = fig7();
        let sweep = detuning_sweep(grid, &SidebandState::vacuum(6.0).unwrap(), &cav).unwrap();
        assert!(sweep.rows.iter().all(|r| (r.s_r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn partial_conversion_below_threshold() {
        let cav = CavityParams::from_loss(0.999, 0.0).unwrap();
        let state = SidebandState::new(0.5, 2.0, 1.0).unwrap();
        let sweep = detuning_sweep(
            DetuningGrid::new(-12.0, 12.0, 24_001).unwrap(),
            &state,
            &cav,
        )
        .unwrap();
        let max_s = sweep.rows.iter().map(|r| r.s_r).fold(f64::MIN, f64::max);
        let max_angle = sweep
            .rows
            .iter()
            .map(|r| r.theta_magnitude)
            .fold(f64::MIN, f64::max);
        assert!(max_s < state.sq - 1e-3, "{max_s}");
        assert!(max_angle < std::f64::consts::FRAC_PI_2 - 1e-3);
    }

    #[test]
    fn excluded_points_are_reported() {
        let cav = CavityParams::new(
            MirrorPair::new(0.97, 0.97).unwrap(),
            ResponseModel::ExactAiry,
        )
        .unwrap();
        let state = SidebandState::new(0.5, 2.0, 3.0).unwrap();
        let sweep =
            detuning_sweep(DetuningGrid::new(-1.0, 1.0, 21).unwrap(), &state, &cav).unwrap();
        assert_eq!(sweep.rows.len(), 20);
        assert_eq!(sweep.metadata.excluded.len(), 1);
        assert_eq!(sweep.metadata.excluded[0].0, 0.0);
    }

    #[test]
    fn range_outside_domain_rejected() {
        let (_, state, cav) = fig7();
        let grid = DetuningGrid::new(-100.0, 0.0, 11).unwrap();
        assert!(matches!(
            detuning_sweep(grid, &state, &cav),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn metadata_regenerates_identically() {
        let (grid, state, cav) = fig7();
        let a = detuning_sweep(grid, &state, &cav).unwrap();
        let m = &a.metadata;
        let b = detuning_sweep(m.grid, &m.state, &m.cavity).unwrap();
        assert_eq!(a, b);
    }
}

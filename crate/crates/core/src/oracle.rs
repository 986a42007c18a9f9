//! Monte Carlo estimate of the reflected amplitude noise.
//!
//! Each draw samples one pair of input sidebands and one pair of vacuum
//! sidebands as complex Gaussians, pushes them through the four-term
//! reflected amplitude quadrature directly (no transfer coefficients), and
//! records `|dp_R|^2`. With one independent draw per unit-width frequency
//! bin, the mean of `|dp_R|^2` estimates the spectrum.
//!
//! Draws are grouped in fixed blocks of [`BLOCK_SIZE`]. Block `b` uses a
//! ChaCha8 generator seeded from `seed` on stream `b`, and block statistics
//! are merged in block order, so the estimate is bit-identical for any
//! partition count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{QuadraturePair, SidebandState};

pub const BLOCK_SIZE: usize = 4096;
pub const MIN_SAMPLES: usize = 100;

/// `(delta_alpha(nu), delta_alpha*(-nu))` at one analysis frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandPair {
    pub upper: Complex64,
    pub lower_conj: Complex64,
}

impl SidebandPair {
    pub const ZERO: SidebandPair = SidebandPair {
        upper: Complex64::new(0.0, 0.0),
        lower_conj: Complex64::new(0.0, 0.0),
    };

    pub fn from_quadratures(q: QuadraturePair) -> Self {
        let (upper, lower_conj) = q.to_sidebands();
        Self { upper, lower_conj }
    }

    pub fn quadratures(&self) -> QuadraturePair {
        QuadraturePair::from_sidebands(self.upper, self.lower_conj)
    }
}

/// Draws a sideband pair whose quadratures have `<|dp|^2> = sp` and
/// `<|dq|^2> = sq`, uncorrelated (`beta = 0`).
pub fn sample_sideband_pair<R: Rng + ?Sized>(state: &SidebandState, rng: &mut R) -> SidebandPair {
    let sp = (state.sp / 2.0).sqrt();
    let sq = (state.sq / 2.0).sqrt();
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let dp = Complex64::new(sp * normal(), sp * normal());
    let dq = Complex64::new(sq * normal(), sq * normal());
    SidebandPair::from_quadratures(QuadraturePair::new(dp, dq))
}

/// Weights of the four sideband terms of the reflected amplitude quadrature
/// at one `(detuning, nu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationKernel {
    input_upper: Complex64,
    input_lower: Complex64,
    vacuum_upper: Complex64,
    vacuum_lower: Complex64,
}

impl PropagationKernel {
    pub fn new(detuning: f64, nu: f64, cavity: &CavityParams) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::invalid(format!(
                "analysis frequency nu = {nu} must be positive"
            )));
        }
        cavity.check_domain(detuning)?;
        cavity.check_domain(detuning + nu)?;
        cavity.check_domain(detuning - nu)?;
        let theta = cavity.reflection_phase(detuning)?;
        let lo = Complex64::from_polar(1.0, -theta);
        let r_up = cavity.amplitude_reflectance(detuning + nu)?.value;
        let r_lo = cavity.amplitude_reflectance(detuning - nu)?.value;
        let t_up = cavity.amplitude_transmittance(detuning + nu)?.value;
        let t_lo = cavity.amplitude_transmittance(detuning - nu)?.value;
        Ok(Self {
            input_upper: lo * r_up,
            input_lower: lo.conj() * r_lo.conj(),
            vacuum_upper: lo * t_up,
            vacuum_lower: lo.conj() * t_lo.conj(),
        })
    }

    /// Reflected amplitude quadrature `dp_R` for one draw.
    pub fn propagate(&self, input: &SidebandPair, vacuum: &SidebandPair) -> Complex64 {
        self.input_upper * input.upper
            + self.input_lower * input.lower_conj
            + self.vacuum_upper * vacuum.upper
            + self.vacuum_lower * vacuum.lower_conj
    }
}

pub fn propagate_sample(
    input: &SidebandPair,
    vacuum: &SidebandPair,
    detuning: f64,
    nu: f64,
    cavity: &CavityParams,
) -> Result<Complex64> {
    Ok(PropagationKernel::new(detuning, nu, cavity)?.propagate(input, vacuum))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: usize,
    pub state: SidebandState,
    pub detuning: f64,
    pub cavity: CavityParams,
    /// Worker groups; does not change the result.
    pub partitions: usize,
}

impl SamplerConfig {
    pub fn new(
        seed: u64,
        samples: usize,
        state: SidebandState,
        detuning: f64,
        cavity: CavityParams,
    ) -> Self {
        Self {
            seed,
            samples,
            state,
            detuning,
            cavity,
            partitions: 1,
        }
    }

    pub fn with_partitions(mut self, partitions: usize) -> Self {
        self.partitions = partitions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::invalid(format!(
                "at least {MIN_SAMPLES} samples are required, got {}",
                self.samples
            )));
        }
        if self.partitions == 0 {
            return Err(Error::invalid("partition count must be at least 1"));
        }
        self.state.validate_aligned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub samples: usize,
}

impl SpectrumEstimate {
    /// Distance from `expected` in units of the standard error.
    pub fn z_score(&self, expected: f64) -> f64 {
        (self.mean - expected) / self.stderr
    }
}

/// Count, mean and sum of squared deviations of one block.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments {
        n: 0.0,
        mean: 0.0,
        m2: 0.0,
    };

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn run_block(
    config: &SamplerConfig,
    kernel: &PropagationKernel,
    vacuum: &SidebandState,
    block: usize,
) -> Moments {
    let start = block * BLOCK_SIZE;
    let len = BLOCK_SIZE.min(config.samples - start);
    let mut rng = block_rng(config.seed, block);
    let mut m = Moments::EMPTY;
    for _ in 0..len {
        let input = sample_sideband_pair(&config.state, &mut rng);
        let vac = sample_sideband_pair(vacuum, &mut rng);
        m.push(kernel.propagate(&input, &vac).norm_sqr());
    }
    m
}

/// Monte Carlo estimate of the reflected amplitude noise at
/// `(config.detuning, config.state.nu)`.
pub fn estimate_noise(config: &SamplerConfig) -> Result<SpectrumEstimate> {
    config.validate()?;
    let kernel = PropagationKernel::new(config.detuning, config.state.nu, &config.cavity)?;
    let vacuum = SidebandState::vacuum(config.state.nu)?;

    let blocks = config.samples.div_ceil(BLOCK_SIZE);
    let groups = config.partitions.min(blocks);
    let per_group = blocks.div_ceil(groups);
    let grouped = par::map_range(groups, |g| {
        let first = g * per_group;
        let last = ((g + 1) * per_group).min(blocks);
        (first..last)
            .map(|b| run_block(config, &kernel, &vacuum, b))
            .collect::<Vec<_>>()
    });
    let total = grouped
        .into_iter()
        .flatten()
        .fold(Moments::EMPTY, Moments::merge);

    let variance = total.m2 / (total.n - 1.0);
    Ok(SpectrumEstimate {
        mean: total.mean,
        stderr: (variance / total.n).sqrt(),
        samples: config.samples,
    })
}

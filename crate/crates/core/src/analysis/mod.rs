//! Detuning sweeps, critical-point search and parameter scans.

mod critical;
pub mod search;
mod sweep;

pub use critical::{
    bifurcation_scan, conversion_threshold, find_critical_detunings, matching_study, max_rotation,
    BifurcationSample, BifurcationScan, CriticalKind, CriticalPoint, CriticalSearch, CriticalSet,
    MatchingOutcome, MatchingRow, ThresholdSearch, COALESCENCE_WINDOW, FULL_CONVERSION_TOL,
};
pub use sweep::{detuning_sweep, DetuningGrid, NoiseSweep, SweepMetadata, SweepRow};

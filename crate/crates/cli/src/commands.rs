//! One function per subcommand, each turning a validated [`RunConfig`]
//! into a [`Dataset`].

use cavity_rotation::analysis::{
    bifurcation_scan, detuning_sweep, find_critical_detunings, BifurcationScan,
};
use cavity_rotation::oracle::{estimate_noise, SamplerConfig};
use cavity_rotation::reflected_noise;

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Dataset, Note};

/// `|z|` above which an oracle point is a hard failure.
pub const Z_FAIL: f64 = 5.0;
/// `|z|` above which an oracle point is reported as a warning.
pub const Z_WARN: f64 = 3.0;

pub fn execute(config: &RunConfig) -> Result<Dataset, CliError> {
    config.validate()?;
    match config.command {
        Command::Reflectance => cmd_reflectance(config),
        Command::Sweep => cmd_sweep(config),
        Command::Rotation => cmd_rotation(config),
        Command::Critical => cmd_critical(config),
        Command::Bifurcation => cmd_bifurcation(config),
        Command::Oracle => cmd_oracle(config),
    }
}

fn excluded(key: &'static str, at: f64, error: &cavity_rotation::Error) -> Note {
    Note {
        kind: "excluded",
        key,
        at,
        message: error.to_string(),
    }
}

pub fn cmd_reflectance(config: &RunConfig) -> Result<Dataset, CliError> {
    let cavity = config.cavity()?;
    let mut rows = Vec::with_capacity(config.points);
    let mut notes = Vec::new();
    for delta in config.grid()?.values() {
        let row = cavity.amplitude_reflectance(delta).and_then(|r| {
            let theta = cavity.reflection_phase(delta)?;
            let t = cavity.amplitude_transmittance(delta)?;
            Ok(vec![
                Cell::Num(delta),
                Cell::Num(r.magnitude_sq),
                Cell::Num(theta),
                Cell::Num(t.magnitude_sq),
            ])
        });
        match row {
            Ok(row) => rows.push(row),
            Err(e) => notes.push(excluded("delta", delta, &e)),
        }
    }
    Ok(Dataset {
        config: config.clone(),
        columns: &["delta", "r_abs2", "theta_r", "t_abs2"],
        rows,
        notes,
    })
}

fn sweep_notes(sweep: &cavity_rotation::analysis::NoiseSweep) -> Vec<Note> {
    sweep
        .metadata
        .excluded
        .iter()
        .map(|(d, e)| excluded("delta", *d, e))
        .collect()
}

pub fn cmd_sweep(config: &RunConfig) -> Result<Dataset, CliError> {
    let sweep = detuning_sweep(config.grid()?, &config.state()?, &config.cavity()?)?;
    let rows = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::Num(r.delta),
                Cell::Num(r.s_r),
                Cell::Num(r.theta_signed),
                Cell::Num(r.g_p_abs),
                Cell::Num(r.g_q_abs),
                Cell::Num(r.g_vp_abs),
                Cell::Num(r.g_vq_abs),
            ]
        })
        .collect();
    Ok(Dataset {
        config: config.clone(),
        columns: &[
            "delta",
            "s_r",
            "theta_signed",
            "g_p_abs",
            "g_q_abs",
            "g_vp_abs",
            "g_vq_abs",
        ],
        rows,
        notes: sweep_notes(&sweep),
    })
}

pub fn cmd_rotation(config: &RunConfig) -> Result<Dataset, CliError> {
    let sweep = detuning_sweep(config.grid()?, &config.state()?, &config.cavity()?)?;
    let rows = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::Num(r.delta),
                Cell::Num(r.theta_signed),
                Cell::Num(r.theta_magnitude),
            ]
        })
        .collect();
    Ok(Dataset {
        config: config.clone(),
        columns: &["delta", "theta_signed", "theta_magnitude"],
        rows,
        notes: sweep_notes(&sweep),
    })
}

pub fn cmd_critical(config: &RunConfig) -> Result<Dataset, CliError> {
    let set = find_critical_detunings(&config.state()?, &config.cavity()?, &config.search())?;
    let rows = set
        .points
        .iter()
        .map(|p| {
            vec![
                Cell::Num(set.nu),
                Cell::Num(p.delta),
                Cell::Text(p.kind.as_str()),
                Cell::Num(p.s_r),
            ]
        })
        .collect();
    Ok(Dataset {
        config: config.clone(),
        columns: &["nu", "delta", "kind", "s_r"],
        rows,
        notes: Vec::new(),
    })
}

pub fn cmd_bifurcation(config: &RunConfig) -> Result<Dataset, CliError> {
    let scan = bifurcation_scan(
        config.nu_min,
        config.nu_max,
        config.steps,
        &config.state()?,
        &config.cavity()?,
        &config.search(),
    )?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for sample in &scan.samples {
        match &sample.result {
            Ok(set) => rows.extend(set.points.iter().map(|p| {
                vec![
                    Cell::Num(sample.nu),
                    Cell::Num(p.delta),
                    Cell::Text(p.kind.as_str()),
                    Cell::Num(BifurcationScan::CARRIER_ASYMPTOTE),
                    Cell::Num(BifurcationScan::sideband_asymptote(sample.nu)),
                ]
            })),
            Err(e) => notes.push(Note {
                kind: "failure",
                key: "nu",
                at: sample.nu,
                message: e.to_string(),
            }),
        }
    }
    if rows.is_empty() && !notes.is_empty() {
        return Err(CliError::Model(cavity_rotation::Error::NumericalFailure(
            format!(
                "every sample of the scan failed; first: {}",
                notes[0].message
            ),
        )));
    }
    Ok(Dataset {
        config: config.clone(),
        columns: &[
            "nu",
            "delta",
            "kind",
            "asymptote_carrier",
            "asymptote_sideband",
        ],
        rows,
        notes,
    })
}

/// Oracle detunings: the requested list, or `0` followed by the local
/// maxima of the configured sweep.
pub fn oracle_detunings(config: &RunConfig) -> Result<Vec<f64>, CliError> {
    if let Some(deltas) = &config.deltas {
        return Ok(deltas.clone());
    }
    let sweep = detuning_sweep(config.grid()?, &config.state()?, &config.cavity()?)?;
    let mut deltas = vec![0.0];
    deltas.extend(
        sweep
            .local_maxima()
            .iter()
            .map(|r| r.delta)
            .filter(|&d| d != 0.0),
    );
    Ok(deltas)
}

pub fn cmd_oracle(config: &RunConfig) -> Result<Dataset, CliError> {
    let cavity = config.cavity()?;
    let state = config.state()?;
    let deltas = oracle_detunings(config)?;
    let mut resolved = config.clone();
    resolved.deltas = Some(deltas.clone());

    let mut rows = Vec::with_capacity(deltas.len());
    let mut notes = Vec::new();
    for &delta in &deltas {
        let analytic = reflected_noise(delta, &state, &cavity)?;
        let sampler = SamplerConfig::new(config.seed, config.samples, state, delta, cavity.clone())
            .with_partitions(config.partitions);
        let estimate = estimate_noise(&sampler)?;
        let z = estimate.z_score(analytic);
        if z.abs() > Z_WARN {
            notes.push(Note {
                kind: if z.abs() > Z_FAIL {
                    "mismatch"
                } else {
                    "warning"
                },
                key: "delta",
                at: delta,
                message: format!("z = {z:.3}"),
            });
        }
        rows.push(vec![
            Cell::Num(delta),
            Cell::Num(analytic),
            Cell::Num(estimate.mean),
            Cell::Num(estimate.stderr),
            Cell::Num(z),
        ]);
    }
    Ok(Dataset {
        config: resolved,
        columns: &["delta", "s_r_analytic", "s_r_mc", "stderr", "z_score"],
        rows,
        notes,
    })
}

//! `cavrot`: datasets for cavity-induced conversion of phase noise into
//! amplitude noise.
//!
//! Each subcommand writes one dataset as CSV (default) or JSON. The CSV
//! header carries the complete configuration as `# key=value` lines, so a
//! dataset can be regenerated with `cavrot <command> --config <dataset>`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid parameters,
//! 3 numerical failure, 4 oracle mismatch.

pub mod commands;
pub mod config;
mod error;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use cavity_rotation::ResponseModel;
use clap::{Args, Parser, Subcommand};

pub use crate::config::{Command, Format, Preset, RunConfig};
pub use crate::error::CliError;
pub use crate::output::Dataset;

#[derive(Debug, Parser)]
#[command(
    name = "cavrot",
    version,
    about = "Phase-to-amplitude noise conversion by a detuned optical cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Reflected intensity, reflection phase and transmitted intensity against detuning.
    Reflectance(RunArgs),
    /// Reflected amplitude-noise spectrum and transfer coefficients against detuning.
    Sweep(RunArgs),
    /// Noise-ellipse rotation angle against detuning.
    Rotation(RunArgs),
    /// Detunings where the reflected noise has zero slope.
    Critical(RunArgs),
    /// Zero-slope detunings over a range of analysis frequencies.
    Bifurcation(RunArgs),
    /// Monte Carlo check of the reflected noise spectrum.
    Oracle(RunArgs),
}

impl CommandArgs {
    fn split(self) -> (Command, RunArgs) {
        match self {
            CommandArgs::Reflectance(a) => (Command::Reflectance, a),
            CommandArgs::Sweep(a) => (Command::Sweep, a),
            CommandArgs::Rotation(a) => (Command::Rotation, a),
            CommandArgs::Critical(a) => (Command::Critical, a),
            CommandArgs::Bifurcation(a) => (Command::Bifurcation, a),
            CommandArgs::Oracle(a) => (Command::Oracle, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat key=value config file, or a dataset written by cavrot.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Reflectance setup: r1=0.95, t2=0.003, detuning in [-5, 5].
    #[arg(long, group = "preset")]
    pub fig3: bool,
    /// Rotation-angle setup: r1=0.95, t2=0.003, nu=6, detuning in [-12, 12].
    #[arg(long, group = "preset")]
    pub fig6: bool,
    /// Noise-spectrum setup: r1=0.95, t2=0.003, nu=6, sp=0.5, sq=2, detuning in [-12, 12].
    #[arg(long, group = "preset")]
    pub fig7: bool,
    /// Zero-slope map setup: lossless, r1=0.999, nu in [0.2, 10].
    #[arg(long, group = "preset")]
    pub fig8: bool,

    /// Input-mirror intensity reflectivity R1.
    #[arg(long)]
    pub r1: Option<f64>,
    /// Output-mirror transmission (loss) T2 = 1 - R2.
    #[arg(long, conflicts_with = "r2")]
    pub t2: Option<f64>,
    /// Output-mirror intensity reflectivity R2, instead of --t2.
    #[arg(long)]
    pub r2: Option<f64>,
    /// Response model: exact-airy or lorentzian.
    #[arg(long)]
    pub model: Option<ResponseModel>,

    /// Amplitude-quadrature noise (shot noise = 1).
    #[arg(long)]
    pub sp: Option<f64>,
    /// Phase-quadrature noise (shot noise = 1).
    #[arg(long)]
    pub sq: Option<f64>,
    /// Analysis frequency in cavity bandwidths.
    #[arg(long)]
    pub nu: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub delta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_max: Option<f64>,
    /// Number of detuning grid points.
    #[arg(long, value_parser = parse_count)]
    pub points: Option<usize>,

    #[arg(long)]
    pub nu_min: Option<f64>,
    #[arg(long)]
    pub nu_max: Option<f64>,
    /// Number of analysis frequencies in a bifurcation scan.
    #[arg(long, value_parser = parse_count)]
    pub steps: Option<usize>,
    /// Root-finding tolerance in detuning.
    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo draws per oracle point.
    #[arg(long, value_parser = parse_count)]
    pub samples: Option<usize>,
    /// Worker groups for sampling; results do not depend on it.
    #[arg(long, value_parser = parse_count)]
    pub partitions: Option<usize>,
    /// Oracle detunings, comma separated. Default: 0 and the sweep maxima.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub deltas: Option<Vec<f64>>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output if absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn parse_count(s: &str) -> Result<usize, String> {
    config::count(s)
}

impl RunArgs {
    fn preset(&self) -> Option<Preset> {
        [
            (self.fig3, Preset::Fig3),
            (self.fig6, Preset::Fig6),
            (self.fig7, Preset::Fig7),
            (self.fig8, Preset::Fig8),
        ]
        .into_iter()
        .find_map(|(on, p)| on.then_some(p))
    }

    /// Layers defaults, config file, preset and flags.
    pub fn resolve(&self, command: Command) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::new(command);
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        if let Some(preset) = self.preset() {
            cfg.apply_preset(preset);
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                })*
            };
        }
        take!(
            r1, t2, model, sp, sq, nu, delta_min, delta_max, points, nu_min, nu_max, steps, tol,
            seed, samples, partitions, format
        );
        if let Some(r2) = self.r2 {
            cfg.t2 = 1.0 - r2;
        }
        if let Some(deltas) = &self.deltas {
            cfg.deltas = Some(deltas.clone());
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        Ok(cfg)
    }
}

/// Runs one invocation and writes its dataset. Warnings go to `warn`.
pub fn run_config<W: Write>(config: &RunConfig, warn: &mut W) -> Result<Dataset, CliError> {
    let data = commands::execute(config)?;
    for note in &data.notes {
        writeln!(
            warn,
            "warning: {} at {} = {}: {}",
            note.kind, note.key, note.at, note.message
        )?;
    }
    match &config.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            output::write(&data, &mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            output::write(&data, &mut lock)?;
            lock.flush()?;
        }
    }
    let mismatches = data.notes.iter().filter(|n| n.kind == "mismatch").count();
    if mismatches > 0 {
        return Err(CliError::OracleMismatch {
            count: mismatches,
            limit: commands::Z_FAIL,
        });
    }
    Ok(data)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (command, args) = cli.command.split();
    let result = args
        .resolve(command)
        .and_then(|cfg| run_config(&cfg, &mut std::io::stderr()));
    match result {
        Ok(_) => 0,
        Err(CliError::Write(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

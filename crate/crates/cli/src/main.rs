//! `macrosize` command-line tool.
//!
//! Exit codes: 0 success, 2 input error, 3 measure undefined for the input,
//! 4 numerical tolerance failure. `MACROSIZE_THREADS` caps the worker pool.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use macrosize::Error;
use serde::Serialize;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "macrosize", version, about = "Effective sizes of macroscopic quantum states of light and spin ensembles")]
pub struct Cli {
    /// Output format; defaults to the output file extension, else per command.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed recorded in every output header.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a named state (or its two components) and write it as JSON.
    State(StateArgs),
    /// Evaluate one measure on a state, density operator or pair file.
    Measure(MeasureArgs),
    /// Map a photonic state onto M spins.
    Absorb(AbsorbArgs),
    /// Reproduce the size-classification table.
    Table1(Table1Args),
    /// Evaluate one measure along a family ladder and fit its exponent.
    Sweep(SweepArgs),
    /// Run the mapping diagnostics.
    VerifyMapping(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct StateArgs {
    /// fock, coherent, even-cat, fock-superposition, displaced-single-photon,
    /// ghz, dicke, spin-coherent or mixed-cat.
    #[arg(long)]
    pub name: Option<String>,
    /// JSON state spec `{"name": ..., "params": {...}}` instead of flags.
    #[arg(long, conflicts_with = "name")]
    pub spec: Option<PathBuf>,
    /// Real part of alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Imaginary part of alpha.
    #[arg(long = "alpha-im", allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Dicke-sector cutoff.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Coherence of the mixed cat.
    #[arg(long)]
    pub d: Option<f64>,
    /// Fock cutoff.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Write the two superposed components as a pair instead of the state.
    #[arg(long)]
    pub components: bool,
    /// State file; stdout when absent.
    #[arg(short, long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    /// max-variance, n-eff, relative-fisher, m2, c-delta, d-bar, index-q,
    /// index-p, i-wigner, i-spin or size-pg.
    pub measure: String,
    /// State, density or pair file.
    pub input: PathBuf,
    /// Error tolerance of c-delta.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Guessing threshold of size-pg.
    #[arg(long = "p-g", default_value_t = 2.0 / 3.0)]
    pub p_g: f64,
    /// Use a homodyne channel at this quadrature angle for size-pg.
    #[arg(long, allow_hyphen_values = true)]
    pub homodyne: Option<f64>,
    /// Spins that absorb a photonic input before a spin measure.
    #[arg(long = "M")]
    pub spins: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AbsorbMode {
    Exact,
    Approx,
}

#[derive(Debug, Args, Serialize)]
pub struct AbsorbArgs {
    /// Single-mode photonic state or density file.
    pub input: PathBuf,
    #[arg(long = "M")]
    pub spins: usize,
    #[arg(long, value_enum, default_value_t = AbsorbMode::Approx)]
    pub mode: AbsorbMode,
    /// Pulse area of the exact evolution.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub g: f64,
    /// Spin state file; the mapping report goes to stdout.
    #[arg(short, long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Table1Args {
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub ladder: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long = "p-g", default_value_t = 2.0 / 3.0)]
    pub p_g: f64,
    /// M = factor * N.
    #[arg(long = "spins-per-excitation", default_value_t = 200)]
    pub spins_per_excitation: usize,
    /// N held fixed in the sweep over M.
    #[arg(long = "m-sweep-size", default_value_t = 8)]
    pub m_sweep_size: usize,
    #[arg(long = "m-sweep-spins", value_delimiter = ',', default_value = "1600,3200,6400,12800")]
    pub m_sweep_spins: Vec<usize>,
    #[arg(short, long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// even-cat, displaced-single-photon, fock-superposition, fock or coherent.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub measure: String,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub ladder: Vec<usize>,
    /// M = factor * N.
    #[arg(long = "spins-per-excitation", default_value_t = 200, conflicts_with = "spins")]
    pub spins_per_excitation: usize,
    /// Fixed M for every ladder point.
    #[arg(long = "M")]
    pub spins: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long = "p-g", default_value_t = 2.0 / 3.0)]
    pub p_g: f64,
    #[arg(short, long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Spin counts for the operator-map deviation; each should double the last.
    #[arg(long = "M", value_delimiter = ',', default_value = "200,400,800")]
    pub spins: Vec<usize>,
    /// Excitation cutoff of the operator map.
    #[arg(long = "K", default_value_t = 4)]
    pub cutoff: usize,
    /// Mean photon number of the coherent probe.
    #[arg(long = "alpha-sq", default_value_t = 2.0)]
    pub alpha_sq: f64,
    /// Spin counts for the exact-vs-approximate fidelity.
    #[arg(long = "fidelity-M", value_delimiter = ',', default_value = "200,2000")]
    pub fidelity_spins: Vec<usize>,
    /// Largest 2j of the disentangling check.
    #[arg(long = "max-two-j", default_value_t = 20)]
    pub max_two_j: usize,
    #[arg(long, default_value_t = 1.2, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(short, long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(Error),
    /// Checks ran but a tolerance was missed.
    Tolerance(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Tolerance(_) => 4,
            CliError::Core(e) => match e {
                Error::Undefined(_) | Error::Unsupported(_) => 3,
                Error::Numerical(_) => 4,
                Error::Domain(_) | Error::Truncation(_) | Error::Contract(_) | Error::DimensionOverflow(_) => 2,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "input error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Tolerance(s) => write!(f, "tolerance check failed: {s}"),
        }
    }
}

/// Worker cap from `MACROSIZE_THREADS`; `0` or unset lets the pool decide.
fn threads() -> Result<usize, CliError> {
    match std::env::var("MACROSIZE_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("MACROSIZE_THREADS must be a non-negative integer, got '{v}'"))),
        _ => Ok(0),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = threads().and_then(|t| commands::run(&cli, t));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("macrosize: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

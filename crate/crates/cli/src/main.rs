//! `threelevel`: runs master-equation and emission-spectrum scenarios for a
//! driven three-level atom and writes CSV tables and SVG plots.

mod config;
mod csv;
mod plot;
mod report;
mod run;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, Mode, Overrides};

/// Environment variable giving the number of worker threads. Unset means
/// sequential execution.
const THREADS_VAR: &str = "THREELEVEL_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "threelevel",
    version,
    about = "Optical pumping and emission spectra of a driven three-level atom"
)]
#[command(
    after_help = "Exit codes: 0 success, 2 invalid configuration, 3 numerical failure, 4 I/O failure.\n\
Set THREELEVEL_THREADS to run sweep points and frequencies in parallel."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Populations and coherences from ρ(0) = |g⟩⟨g|
    Populations(Overrides),
    /// Closed-form doublet spectrum (constant resonant drive)
    SpectrumAnalytic(Overrides),
    /// Steady-state spectrum by the quantum regression theorem
    SpectrumQrt(Overrides),
    /// One-photon trajectory spectrum for constant drive
    SpectrumTrajectory(Overrides),
    /// One-photon trajectory spectrum for ramped or detuned drive
    SpectrumTransient(Overrides),
    /// All three spectrum methods on one grid, with a comparison report
    Compare(Overrides),
    /// Repeat one mode over a list of parameter values
    Sweep(Overrides),
    /// Run the mode named in the scenario file
    Run(Overrides),
}

impl Command {
    fn split(self) -> (Option<Mode>, Overrides) {
        match self {
            Command::Populations(o) => (Some(Mode::Populations), o),
            Command::SpectrumAnalytic(o) => (Some(Mode::SpectrumAnalytic), o),
            Command::SpectrumQrt(o) => (Some(Mode::SpectrumQrt), o),
            Command::SpectrumTrajectory(o) => (Some(Mode::SpectrumTrajectory), o),
            Command::SpectrumTransient(o) => (Some(Mode::SpectrumTransient), o),
            Command::Compare(o) => (Some(Mode::Compare), o),
            Command::Sweep(o) => (Some(Mode::Sweep), o),
            Command::Run(o) => (None, o),
        }
    }
}

fn threads() -> Result<usize, String> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(1),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {v:?}")),
    }
}

fn main() -> ExitCode {
    let (mode, overrides) = Cli::parse().command.split();

    let text = match &overrides.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => String::new(),
    };
    let cfg = match parse_config(&text, mode, &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let pool = match threads().and_then(|n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| e.to_string())
    }) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let result = pool
        .install(|| run::run_scenario(&cfg))
        .and_then(|outcome| run::write_artifacts(&cfg.output.dir, &outcome.artifacts).map(|paths| (outcome, paths)));
    match result {
        Ok((outcome, paths)) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

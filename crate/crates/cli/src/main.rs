//! `bsdict`: B-spline bases, translation dictionaries and sparse approximation.

mod commands;
mod config;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Status;
use config::{ConfigError, Flags, RunConfig, SignalPreset};

#[derive(Parser)]
#[command(name = "bsdict", version, about = "B-spline dictionaries and sparse approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a B-spline basis (ESEP or EPKB) on the coarse partition.
    Basis(Flags),
    /// Sample the translation dictionary.
    Dict(Flags),
    /// Certify that the dictionary spans the fine spline space.
    Certify(Flags),
    /// Estimate frame bounds and check the frame inequality.
    Frame(Flags),
    /// Approximate a signal with the dictionary and with the basis.
    Approx(Flags),
    /// Regenerate one of the built-in experiments.
    Reproduce {
        experiment: Preset,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Blocky,
    Chirp,
    Figure1,
}

fn preset_base(preset: Preset) -> RunConfig {
    match preset {
        Preset::Blocky => RunConfig {
            m: Some(1),
            interval: Some((0.0, 4.0)),
            b: Some(1.0),
            b_prime: Some(1.0 / 256.0),
            target_relerr: 1e-6,
            preset: Some(SignalPreset::Blocky),
            out: "out/blocky".into(),
            ..RunConfig::default()
        },
        Preset::Chirp => RunConfig {
            m: Some(4),
            interval: Some((0.0, 2.0)),
            b: Some(1.0 / 8.0),
            b_prime: Some(1.0 / 32.0),
            target_relerr: 2e-2,
            preset: Some(SignalPreset::Chirp),
            out: "out/chirp".into(),
            ..RunConfig::default()
        },
        Preset::Figure1 => RunConfig {
            out: "out/figure1".into(),
            ..RunConfig::default()
        },
    }
}

fn run(cli: Cli) -> Result<Status, ConfigError> {
    let base = RunConfig::default();
    match cli.command {
        Command::Basis(f) => commands::basis(&RunConfig::resolve(&f, base)?),
        Command::Dict(f) => commands::dict(&RunConfig::resolve(&f, base)?),
        Command::Certify(f) => commands::certify(&RunConfig::resolve(&f, base)?),
        Command::Frame(f) => commands::frame(&RunConfig::resolve(&f, base)?),
        Command::Approx(f) => commands::approx(&RunConfig::resolve(&f, base)?),
        Command::Reproduce { experiment, flags } => {
            let cfg = RunConfig::resolve(&flags, preset_base(experiment))?;
            match experiment {
                Preset::Figure1 => commands::figure1(&cfg),
                _ => commands::approx(&cfg),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

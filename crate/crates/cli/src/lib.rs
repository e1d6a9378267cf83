//! Command-line front end for `pdc-core`: configuration, subcommands and
//! file formats.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use commands::{MapArgs, PmCurvesArgs, ProfileArgs, StateCheckArgs};
use config::Overrides;

#[derive(Debug, Parser)]
#[command(
    name = "pdc",
    version,
    about = "Polarization-correlation simulations of type-II parametric down-conversion"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase-matching curves in (azimuth, external polar angle).
    PmCurves(PmCurvesArgs),
    /// Far-field map of an observable.
    Map(MapArgs),
    /// Observable along the maximum-gain circle or a line.
    Profile(ProfileArgs),
    /// Compare the Fock-space oracle with the closed-form moments at one mode pair.
    StateCheck(StateCheckArgs),
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const STRICT: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NUMERIC: u8 = 3;
}

/// Exit code for an error returned by a command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<pdc_core::Error>() {
        Some(e) if e.is_numeric() => exit::NUMERIC,
        _ => exit::USAGE,
    }
}

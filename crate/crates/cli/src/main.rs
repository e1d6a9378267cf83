use std::process::ExitCode;

use clap::Parser;

use pdc_cli::commands::{self, Status};
use pdc_cli::config::{RunConfig, UsageError};
use pdc_cli::{exit, exit_code, Cli, Command};

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("PDC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| UsageError(format!("PDC_THREADS: expected a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<Status> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let r = cfg.resolve(&cli.overrides)?;
    let (status, written) = match &cli.command {
        Command::PmCurves(a) => commands::pm_curves(&r, a)?,
        Command::Map(a) => commands::map(&r, a)?,
        Command::Profile(a) => commands::profile(&r, a)?,
        Command::StateCheck(a) => {
            let (status, report, written) = commands::state_check(&r, a)?;
            print!("{}", report.text);
            (status, written)
        }
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(Status::Ok) => exit::OK,
        Ok(Status::StrictFailure) => exit::STRICT,
        Ok(Status::Partial) => exit::NUMERIC,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    ExitCode::from(code)
}

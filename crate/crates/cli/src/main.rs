use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgscatter::pipeline::{self, Output};
use kgscatter::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "kgscatter", version, about = "Klein-Gordon decay and scattering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV, gnuplot and report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Accepted for scripts; every computation is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the evolution and write series and checkpoints.
    Simulate,
    /// Resonant pipeline: a₀, ray fits, v_mod and the limit profile V.
    Resonant,
    /// Non-resonant pipeline: normal form, log phase correction and the final state W.
    Nonresonant,
    /// Weighted propagator norms and their decay exponents.
    Localdecay,
    /// Stationary phase against brute force and the cubic phase table.
    Oscint,
    /// Run a command over an ε × amplitude lattice.
    Sweep,
}

enum Failure {
    Config(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Json(_)
            | Error::Grid(_)
            | Error::Domain(_)
            | Error::BoundaryDecay(_)
            | Error::ResonantCoefficient { .. }
            | Error::WindowTooLarge(_)
            | Error::GridTooLarge(_) => Failure::Config(e.to_string()),
            e => Failure::Run(e),
        }
    }
}

fn load<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C, Failure> {
    let Some(path) = path else { return Ok(C::default()) };
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn execute<C, R, F>(common: &Common, f: F) -> Result<(), Failure>
where
    C: DeserializeOwned + Default + Serialize,
    R: Serialize,
    F: FnOnce(&C, &Output) -> kgscatter::Result<R>,
{
    let cfg: C = load(common.config.as_deref())?;
    if common.print_config {
        return emit(&cfg);
    }
    let out = match &common.out {
        Some(dir) => Output::to_dir(dir)?,
        None => Output::discard(),
    };
    let report = f(&cfg, &out)?;
    if common.out.is_none() {
        emit(&report)?;
    }
    Ok(())
}

/// Pretty JSON on stdout; a closed pipe is not an error.
fn emit<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::from(e).into()),
        _ => Ok(()),
    }
}

fn dispatch(cmd: Command, common: &Common) -> Result<(), Failure> {
    match cmd {
        Command::Simulate => execute(common, pipeline::cmd_simulate),
        Command::Resonant => execute(common, pipeline::cmd_resonant),
        Command::Nonresonant => execute(common, pipeline::cmd_nonresonant),
        Command::Localdecay => execute(common, pipeline::cmd_localdecay),
        Command::Oscint => execute(common, pipeline::cmd_oscint),
        Command::Sweep => execute(common, pipeline::cmd_sweep),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if cli.common.seedless {
        log::debug!("--seedless: no random number generator is used");
    }
    if let Some(n) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command, &cli.common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) if e.is_numerical_guard() => {
            eprintln!("numerical guard: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

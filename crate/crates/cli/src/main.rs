// SPDX-License-Identifier: Apache-2.0

//! `inloop`: spectra of feedback-controlled light and optomechanics.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

mod commands;
mod config;
mod error;
mod logging;
mod presets;
mod table;

use commands::Command;
use config::{ScenarioConfig, SCHEMA_VERSION};
use error::{CliError, CliResult};
use table::Format;

#[derive(Debug, Parser)]
#[command(name = "inloop", version, about = "Spectra of feedback-controlled light and optomechanics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// In-loop photocurrent and quadrature spectra of the bare laser loop.
    Spectrum(RunArgs),
    /// Empty cavity in the loop: spectra, loop gain, window, susceptibility.
    Cavity(RunArgs),
    /// Scattering rates and phonon numbers for sideband cooling.
    Cooling(RunArgs),
    /// Cavity and mechanical amplitudes after a seed pulse.
    Pulse(RunArgs),
    /// Ponderomotive squeezing at the unused port.
    Squeeze(RunArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario file (TOML). Overrides the preset key by key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario, `fig2` to `fig13`.
    #[arg(long)]
    preset: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Print the resolved scenario as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

fn resolve(cmd: Command, args: &RunArgs) -> CliResult<(ScenarioConfig, String)> {
    let mut value = match &args.preset {
        Some(name) => {
            let (meant, v) = presets::resolve(name)?;
            if meant != cmd {
                return Err(CliError::config(format!("preset {name} belongs to the `{}` command", meant.name())));
            }
            v
        }
        None => toml::Value::Table(Default::default()),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let over: toml::Value = toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        config::merge(&mut value, over);
    }
    if args.preset.is_none() && args.config.is_none() {
        return Err(CliError::config("give --config, --preset, or both"));
    }
    let cfg: ScenarioConfig = value.try_into().map_err(|e: toml::de::Error| CliError::config(e.to_string()))?;
    cfg.check_schema()?;
    let text = cfg.to_toml();
    Ok((cfg, text))
}

fn run(cmd: Command, args: &RunArgs) -> CliResult<()> {
    let (cfg, text) = resolve(cmd, args)?;
    if args.print_config {
        io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    }
    log::info!("running {} on the resolved scenario", cmd.name());
    let mut table = cmd.run(&cfg)?;
    table.meta("tool", "inloop");
    table.meta("version", env!("CARGO_PKG_VERSION"));
    table.meta("command", cmd.name());
    table.meta("schema", SCHEMA_VERSION);
    table.meta("config_sha256", format!("{:x}", Sha256::digest(text.as_bytes())));
    if let Some(p) = &args.preset {
        table.meta("preset", p.as_str());
    }
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(args.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            table.write(args.format, &mut w)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    logging::init();
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Cavity(a) => (Command::Cavity, a),
        Sub::Cooling(a) => (Command::Cooling, a),
        Sub::Pulse(a) => (Command::Pulse, a),
        Sub::Squeeze(a) => (Command::Squeeze, a),
        Sub::Presets => {
            for name in presets::NAMES {
                let (cmd, _) = presets::lookup(name).expect("listed presets exist");
                println!("{name}\t{}", cmd.name());
            }
            return ExitCode::SUCCESS;
        }
    };
    match run(cmd, &args) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe downstream (`| head`) is not a failure.
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("inloop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

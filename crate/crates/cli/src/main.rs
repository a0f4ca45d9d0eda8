//! `kpo`: runs one diagnostic of the coupled Kerr parametric oscillator
//! model and writes its data files plus a manifest.

mod commands;
mod config;
mod error;
mod output;
mod presets;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use kpo_core::rng;

use crate::commands::Experiment;
use crate::config::{merge, paper_scale_overlay, parse_assignment, parse_document, ExperimentConfig};
use crate::error::CliError;
use crate::output::{Manifest, RngInfo, RunOutput};

#[derive(Debug, Parser)]
#[command(
    name = "kpo",
    version,
    about = "Chaos diagnostics for two coupled Kerr parametric oscillators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Potential landscape on a grid plus its local minima.
    Potential(RunArgs),
    /// Classical surface of section at y₂ = 0.
    ClassicalSos(RunArgs),
    /// Classical momenta recorded near the potential minimum.
    ClassicalMpmp(RunArgs),
    /// Distance between two nearby classical trajectories.
    Sensitivity(RunArgs),
    /// Ensemble estimate of the classical OTOC.
    ClassicalOtoc(RunArgs),
    /// Time-accumulated Wigner/Husimi surface of section.
    QuantumSos(RunArgs),
    /// Time-accumulated Wigner/Husimi momentum map.
    QuantumMpmp(RunArgs),
    /// Quantum OTOCs from the energy eigenbasis.
    Otoc {
        #[command(flatten)]
        run: RunArgs,
        /// Emit C_{2,1} even when ξ₀ = 0, where it vanishes identically.
        #[arg(long)]
        include_zero_c21: bool,
        /// Also run the classical ensemble counterpart.
        #[arg(long)]
        with_classical: bool,
    },
    /// Spectrum, even-sector spacings and Brody fit.
    Spectrum(RunArgs),
    /// Run the subcommand named by a preset.
    Run {
        #[arg(value_name = "PRESET")]
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// List the embedded presets, or print one resolved configuration.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Debug, Args, Clone, Default)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from an embedded figure preset.
    #[arg(long)]
    preset: Option<String>,
    /// Override one value, e.g. --set model.xi0=0.3 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Use the full-size ensembles (slow).
    #[arg(long)]
    paper_scale: bool,
    /// Cap the worker threads. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output root; the run goes into a subdirectory named after the preset or command.
    #[arg(long, env = "KPO_OUTPUT_DIR")]
    out: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

/// Layers, lowest priority first: defaults, preset, config file,
/// `--paper-scale`, `--set`.
fn resolve(args: &RunArgs, preset: Option<&presets::Preset>) -> Result<ExperimentConfig, CliError> {
    let mut table = ExperimentConfig::defaults_table();
    if let Some(p) = preset {
        merge(&mut table, p.config.clone());
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        merge(&mut table, parse_document(&text, &path.display().to_string())?);
    }
    if args.paper_scale {
        merge(&mut table, paper_scale_overlay());
    }
    for s in &args.set {
        merge(&mut table, parse_assignment(s)?);
    }
    let config = ExperimentConfig::from_table(table)?;
    config.validate()?;
    Ok(config)
}

fn execute(experiment: Experiment, args: RunArgs, flags: &[&str]) -> Result<(), CliError> {
    let preset = args.preset.as_deref().map(presets::find).transpose()?;
    if let Some(p) = &preset {
        if p.command != experiment {
            return Err(CliError::Config(format!(
                "preset {} is for `{}`, not `{}`",
                p.name,
                p.command.name(),
                experiment.name()
            )));
        }
    }
    let mut args = args;
    args.set.extend(flags.iter().map(|s| s.to_string()));
    let config = resolve(&args, preset.as_ref())?;
    if args.dry_run {
        return print_stdout(&config.to_toml());
    }

    let threads = args.threads.unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let label = preset.as_ref().map_or(experiment.name(), |p| p.name.as_str());
    let root = args.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let mut out = RunOutput::create(root.join(label))?;
    out.write("resolved_config.toml", config.to_toml().as_bytes())?;

    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    log::info!("running {} into {}", experiment.name(), out.dir().display());
    let result = experiment.run(&config, &mut out);

    let manifest = Manifest {
        experiment: label.to_string(),
        command: experiment.name().to_string(),
        preset: preset.as_ref().map(|p| p.name.clone()),
        status: if result.is_ok() { "ok" } else { "failed" },
        error: result.as_ref().err().map(ToString::to_string),
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RngInfo {
            algorithm: rng::ALGORITHM,
            seed: experiment.seed(&config),
        },
        threads: rayon::current_num_threads(),
        started_unix,
        duration_seconds: clock.elapsed().as_secs_f64(),
        config: serde_json::to_value(&config).map_err(std::io::Error::other)?,
        files: out.files().to_vec(),
    };
    out.write_manifest(&manifest)?;
    result
}

fn list_presets(show: Option<String>) -> Result<(), CliError> {
    let mut text = String::new();
    match show {
        Some(name) => {
            let p = presets::find(&name)?;
            text += &format!("# {}: kpo {} ({})\n", p.name, p.command.name(), p.description);
            text += &resolve(&RunArgs::default(), Some(&p))?.to_toml();
        }
        None => {
            for p in presets::all() {
                text += &format!("{:<7} {:<15} {}\n", p.name, p.command.name(), p.description);
            }
        }
    }
    print_stdout(&text)
}

/// A closed pipe (`kpo presets | head`) is not an error.
fn print_stdout(text: &str) -> Result<(), CliError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Potential(a) => execute(Experiment::Potential, a, &[]),
        Command::ClassicalSos(a) => execute(Experiment::ClassicalSos, a, &[]),
        Command::ClassicalMpmp(a) => execute(Experiment::ClassicalMpmp, a, &[]),
        Command::Sensitivity(a) => execute(Experiment::Sensitivity, a, &[]),
        Command::ClassicalOtoc(a) => execute(Experiment::ClassicalOtoc, a, &[]),
        Command::QuantumSos(a) => execute(Experiment::QuantumSos, a, &[]),
        Command::QuantumMpmp(a) => execute(Experiment::QuantumMpmp, a, &[]),
        Command::Otoc {
            run,
            include_zero_c21,
            with_classical,
        } => {
            let mut flags = Vec::new();
            if include_zero_c21 {
                flags.push("otoc.zero_coupling_c21=true");
            }
            if with_classical {
                flags.push("otoc.with_classical=true");
            }
            execute(Experiment::Otoc, run, &flags)
        }
        Command::Spectrum(a) => execute(Experiment::Spectrum, a, &[]),
        Command::Run { name, mut run } => {
            let command = presets::find(&name)?.command;
            run.preset = Some(name);
            execute(command, run, &[])
        }
        Command::Presets { show } => list_presets(show),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

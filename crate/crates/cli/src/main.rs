use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ringflux_core::experiments::{execute_to_dir, preset, Command, RunConfig, WindowSpec, PRESETS};
use ringflux_core::Error;

/// Ring with a complex potential threaded by a time-dependent flux.
#[derive(Parser)]
#[command(name = "ringflux", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Flux bands, exceptional points and (for a ramp) the level diagram.
    Spectrum(RunArgs),
    /// Propagate the winding-number amplitudes.
    Evolve(RunArgs),
    /// Full run against a run with the potential removed after the onset time.
    Transparency(RunArgs),
    /// Zener probability, closed form against two-level integration.
    LzScan(RunArgs),
    /// Compiled-in configurations.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Print a preset as JSON.
    Dump { name: String },
    /// List preset names.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `auto` or N_MIN:N_MAX.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Number of output samples.
    #[arg(long)]
    samples: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => {
                preset(name).ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?
            }
            (None, None) => {
                return Err(Error::Config(
                    "pass --config <path> or --preset <name>".into(),
                ))
            }
        };
        if let Some(w) = &self.window {
            cfg.window = w.parse::<WindowSpec>()?;
        }
        if let Some(r) = self.rtol {
            cfg.propagator.rtol = r;
        }
        if let Some(a) = self.atol {
            cfg.propagator.atol = a;
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        Ok(cfg)
    }
}

fn run(cmd: Command, args: &RunArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let manifest = execute_to_dir(cmd, &cfg, &args.out)?;
    for (k, v) in &manifest.metrics {
        println!("{k} = {v:.6e}");
    }
    println!(
        "wrote {} files to {}",
        manifest.artifacts.len() + 1,
        args.out.display()
    );
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Spectrum(a) => run(Command::Spectrum, a),
        Cmd::Evolve(a) => run(Command::Evolve, a),
        Cmd::Transparency(a) => run(Command::Transparency, a),
        Cmd::LzScan(a) => run(Command::LzScan, a),
        Cmd::Preset {
            action: PresetAction::List,
        } => {
            for (name, about) in PRESETS {
                println!("{name:<20} {about}");
            }
            Ok(())
        }
        Cmd::Preset {
            action: PresetAction::Dump { name },
        } => match preset(name) {
            Some(cfg) => {
                println!("{}", cfg.to_json());
                Ok(())
            }
            None => Err(Error::Config(format!("unknown preset '{name}'"))),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use twpa_studio::commands::{self, CalibrateArgs};
use twpa_studio::config::ExperimentConfig;

/// Simulation and measurement-analysis workbench for kinetic-inductance
/// traveling-wave parametric amplifiers.
#[derive(Parser)]
#[command(name = "twpa-studio", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled preset name (currently `paper-device`).
    #[arg(long)]
    preset: Option<String>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateCliArgs {
    /// HOT trace file.
    #[arg(long)]
    hot: PathBuf,
    /// COLD trace file.
    #[arg(long)]
    cold: PathBuf,
    /// TWPA_ON trace file.
    #[arg(long)]
    on: PathBuf,
    /// TWPA_OFF trace file.
    #[arg(long)]
    off: PathBuf,
    /// Gain spectrum CSV (f_Hz,gain_dB).
    #[arg(long)]
    gain: PathBuf,
    /// Hot-load temperature in kelvin.
    #[arg(long, default_value_t = 3.38)]
    t_hot: f64,
    /// Cold-load temperature in kelvin.
    #[arg(long, default_value_t = 0.02)]
    t_cold: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch dispersion curve and bandgap list.
    Dispersion(RunArgs),
    /// Small-signal gain spectrum.
    Gain(RunArgs),
    /// Gain compression and the 1 dB compression point.
    Compression(RunArgs),
    /// Synthetic y-factor noise run against the quantum limit.
    Noise(RunArgs),
    /// Pump-attenuation squeezing sweep.
    Squeeze(RunArgs),
    /// Y-factor analysis of measured trace files.
    Calibrate(CalibrateCliArgs),
}

impl RunArgs {
    fn load(&self) -> twpa_core::Result<(ExperimentConfig, u64, PathBuf)> {
        let config = match (&self.config, &self.preset) {
            (Some(path), None) => ExperimentConfig::from_file(path)?,
            (None, Some(name)) if name == "paper-device" => ExperimentConfig::paper_device_preset(),
            (None, Some(name)) => {
                return Err(twpa_core::Error::config(format!("unknown preset `{name}`")))
            }
            _ => {
                return Err(twpa_core::Error::config(
                    "provide exactly one of --config <path> or --preset <name>",
                ))
            }
        };
        let seed = self.seed.unwrap_or(config.seed);
        let out = self
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&config.output_dir));
        Ok((config, seed, out))
    }
}

fn run(cli: Cli) -> twpa_core::Result<()> {
    match cli.command {
        Command::Dispersion(args) => {
            let (config, _, out) = args.load()?;
            commands::cmd_dispersion(&config, &out)?;
        }
        Command::Gain(args) => {
            let (config, _, out) = args.load()?;
            commands::cmd_gain(&config, &out)?;
        }
        Command::Compression(args) => {
            let (config, _, out) = args.load()?;
            commands::cmd_compression(&config, &out)?;
        }
        Command::Noise(args) => {
            let (config, seed, out) = args.load()?;
            commands::cmd_noise(&config, &out, seed)?;
        }
        Command::Squeeze(args) => {
            let (config, seed, out) = args.load()?;
            commands::cmd_squeeze(&config, &out, seed)?;
        }
        Command::Calibrate(args) => {
            let calibrate_args = CalibrateArgs {
                hot: args.hot,
                cold: args.cold,
                on: args.on,
                off: args.off,
                gain: args.gain,
                t_hot_k: args.t_hot,
                t_cold_k: args.t_cold,
            };
            commands::cmd_calibrate(&calibrate_args, &args.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                twpa_core::Error::Config(_) => 2,
                twpa_core::Error::Domain(_) | twpa_core::Error::Numerical(_) => 3,
                twpa_core::Error::Schema(_) | twpa_core::Error::Io(_) => 4,
            };
            ExitCode::from(code)
        }
    }
}

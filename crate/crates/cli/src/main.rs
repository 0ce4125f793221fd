//! Command-line front end of the mercury LWI simulation toolkit.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

/// Exit code for configuration problems.
const EXIT_CONFIG: u8 = 2;
/// Exit code for numerical non-convergence.
const EXIT_NUMERICS: u8 = 3;

#[derive(Parser)]
#[command(name = "lwi", version, about = "Mercury lasing-without-inversion simulation toolkit")]
struct Cli {
    /// Path to the run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Random seed for the self-check suite.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probe susceptibility spectrum χ(Δ_p).
    Spectrum {
        /// Force the velocity average on or off.
        #[arg(long)]
        doppler: Option<bool>,
        /// Force the phase-noise linewidths on or off.
        #[arg(long)]
        noise: Option<bool>,
    },
    /// ⟨χ″(0)⟩ against drive linewidth or pump rate.
    NoiseSweep,
    /// Stationary laser power against pump power.
    Power,
    /// Threshold pump power against the drive linewidths.
    Threshold,
    /// Spatial gain distribution of the crossed drive beams.
    Gain3d,
    /// Ring-resonator eigenmodes, round-trip gain, and beam quality.
    Cavity,
    /// Run the built-in invariant suite.
    Selfcheck,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }

    if let Command::Selfcheck = cli.command {
        return match commands::selfcheck(cli.seed) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("selfcheck failed: {e}");
                ExitCode::from(EXIT_NUMERICS)
            }
        };
    }

    let Some(config_path) = cli.config.as_ref() else {
        eprintln!("error: --config is required for this command");
        return ExitCode::from(EXIT_CONFIG);
    };
    let raw = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let config = match RunConfig::parse(&raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.directory));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create output directory {}: {e}", out_dir.display());
        return ExitCode::from(EXIT_CONFIG);
    }

    let run = || -> anyhow::Result<()> {
        match &cli.command {
            Command::Spectrum { doppler, noise } => {
                commands::spectrum(&config, &raw, &out_dir, *doppler, *noise)
            }
            Command::NoiseSweep => commands::noise_sweep(&config, &raw, &out_dir),
            Command::Power => commands::power(&config, &raw, &out_dir),
            Command::Threshold => commands::threshold(&config, &raw, &out_dir),
            Command::Gain3d => commands::gain3d(&config, &raw, &out_dir),
            Command::Cavity => commands::cavity(&config, &raw, &out_dir),
            Command::Selfcheck => unreachable!(),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<lwi_core::Error>(),
                    Some(lwi_core::Error::NonConvergence(_))
                )
            }) {
                EXIT_NUMERICS
            } else {
                EXIT_CONFIG
            };
            ExitCode::from(code)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use afcsim_cli::config::Scenario;
use afcsim_cli::runner::{execute, RunOptions};
use afcsim_cli::{load_config, presets, CliError};

/// Simulator of atomic-frequency-comb optical memories: comb construction,
/// echo and cavity runs, control-pulse transfer, spin-wave budgets, sweeps.
#[derive(Parser)]
#[command(name = "afcsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (default: $AFCSIM_OUT or ./afcsim-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the frequency-grid point count (power of two >= 1024).
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Suppress the result summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a bundled preset or a TOML config file.
    Run { config: String },
    /// Run a parameter sweep (the config's scenario must be "sweep").
    Sweep { config: String },
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        std::env::var_os("AFCSIM_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("afcsim-out"))
    })
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (arg, require_sweep) = match &cli.command {
        Command::Run { config } => (config, false),
        Command::Sweep { config } => (config, true),
    };
    let config = load_config(arg).map_err(|e| match e {
        CliError::Io { path, source } if presets::find(arg).is_none() && !PathBuf::from(arg).exists() => {
            CliError::Io { path, source }
        }
        other => other,
    })?;
    if require_sweep && config.scenario != Scenario::Sweep {
        return Err(CliError::Config(afcsim_cli::config::ConfigError::Invalid {
            key: "scenario".into(),
            reason: format!(
                "the sweep command needs scenario = \"sweep\", got {:?}",
                config.scenario.name()
            ),
        }));
    }
    let options = RunOptions {
        grid_points: cli.grid_points,
    };
    let artifacts = execute(&config, &out_dir(cli), &options)?;
    if !cli.quiet {
        println!("{}", artifacts.summary);
        for file in &artifacts.files {
            println!("wrote {}", file.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

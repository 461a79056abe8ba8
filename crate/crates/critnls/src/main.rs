use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use critnls::commands::{self, Common};
use critnls::{CliError, RunConfig, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "critnls", version, about = "Ground states, evolution and blow-up criteria for a coupled cubic NLS system in four dimensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Render SVG charts after a run.
    #[arg(long, global = true)]
    plots: bool,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state and write ground_state.json.
    GroundState {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evolve the seed (or a checkpoint) and write diagnostics.csv.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Classify a checkpointed state against the ground-state thresholds.
    Classify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
    /// Classify and evolve λ-scaled seeds over an equally spaced grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Verify the cutoff bounds at the given radii.
    CheckCutoff {
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
    },
    /// Re-render the charts from a diagnostics CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let common = Common {
        out: cli.common.out,
        plots: cli.common.plots,
        quiet: cli.common.quiet,
    };
    match cli.command {
        Command::GroundState { config } => commands::cmd_ground_state(&RunConfig::load(&config)?, &common),
        Command::Evolve { config, resume } => {
            commands::cmd_evolve(&RunConfig::load(&config)?, &common, resume.as_deref())
        }
        Command::Classify { config, state } => commands::cmd_classify(&RunConfig::load(&config)?, &common, &state),
        Command::Sweep {
            config,
            lambda_min,
            lambda_max,
            steps,
        } => commands::cmd_sweep(&RunConfig::load(&config)?, &common, lambda_min, lambda_max, steps),
        Command::CheckCutoff { radii } => commands::cmd_check_cutoff(&radii, &common),
        Command::Plot { csv } => commands::cmd_plot(&csv, &common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK } as u8);
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use subtractor::config::{OracleMode, SpontVariantConfig};
use subtractor::output::{write_results, Format, RunMeta, VERSION};
use subtractor::{parse_config, run_experiment, Experiment, Overrides, Preset, RunError};

#[derive(Parser)]
#[command(
    name = "subtractor",
    version,
    about = "Quantum-trajectory simulation of single-photon subtraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a built-in parameter sweep.
    Preset {
        #[arg(value_enum)]
        name: Preset,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectories per sweep point.
    #[arg(long)]
    traj: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, value_enum)]
    oracle: Option<OracleMode>,
    #[arg(long, value_enum)]
    spont_variant: Option<SpontVariantConfig>,
    #[arg(long)]
    long_running: bool,
}

impl RunOpts {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            n_traj: self.traj,
            workers: self.workers,
            oracle: self.oracle,
            spont_variant: self.spont_variant,
            long_running: self.long_running,
        }
    }
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let (exp, opts) = match cli.command {
        Command::Run { config, opts } => {
            let text = std::fs::read_to_string(&config).map_err(|e| RunError::io(&config, e))?;
            (parse_config(&text)?, opts)
        }
        Command::Preset { name, opts } => (Experiment::from_preset(name)?, opts),
    };
    let exp = exp.with_overrides(&opts.overrides())?;
    let start = Instant::now();
    let rows = run_experiment(&exp)?;
    let meta = RunMeta {
        version: VERSION.to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        workers: exp.workers,
        rows: rows.len(),
    };
    for path in write_results(&opts.out_dir, &exp, rows, opts.format, &meta)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

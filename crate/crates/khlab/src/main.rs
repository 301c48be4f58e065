use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use khlab::{execute, CliError, Mode};

#[derive(Parser)]
#[command(name = "khlab", version, about = "Kitaev-Heisenberg chain and trapped-ion experiments")]
struct Cli {
    /// Worker threads for sampled trajectories.
    #[arg(long, global = true, env = "KHLAB_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Override a config value, e.g. `--set model.delta=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels, multiplets, entanglement and structure factors.
    Spectrum(RunArgs),
    /// Sampled two-time correlations and their spectra.
    Dynamics(RunArgs),
    /// Zero-mode operator, its commutator with H and symmetry checks.
    Zeromode(RunArgs),
    /// Crystal, transverse modes and mapped spin couplings.
    Iontrap(RunArgs),
    /// Ion-trap couplings followed by correlation dynamics.
    IontrapDynamics(RunArgs),
    /// Long-format plotting table from an artifact directory.
    Plotdata {
        /// Directory written by a previous run.
        input: PathBuf,
        /// Destination; defaults to `<input>/plot_data.csv`.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("khlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    }
    let (mode, args) = match cli.command {
        Command::Spectrum(a) => (Mode::Spectrum, a),
        Command::Dynamics(a) => (Mode::Dynamics, a),
        Command::Zeromode(a) => (Mode::Zeromode, a),
        Command::Iontrap(a) => (Mode::Iontrap, a),
        Command::IontrapDynamics(a) => (Mode::IontrapDynamics, a),
        Command::Plotdata { input, out } => {
            let text = khlab::plot::plot_data(&input)?;
            let dest = out.unwrap_or_else(|| input.join("plot_data.csv"));
            std::fs::write(&dest, text).map_err(|e| CliError::Io(format!("{}: {e}", dest.display())))?;
            return Ok(());
        }
    };
    execute(mode, args.config.as_deref(), &args.overrides, &args.out)?;
    Ok(())
}

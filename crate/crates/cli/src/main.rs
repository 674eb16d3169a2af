use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dce_cli::{run, write_output, CliError, CliResult, Scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "dce", version, about = "Dynamical Casimir effect in cavity optomechanics: spectra, dynamics and emission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest levels versus the cavity frequency, plus avoided-crossing summary
    Levels(Args),
    /// Populations and zero-delay correlations in time
    Dynamics(Args),
    /// Steady-state cavity emission spectrum
    Spectrum(Args),
    /// Exact versus first-order splitting of the resonant anticrossing
    Splitting(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; defaults to the config's `output`, else stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(scenario: Scenario, args: Args) -> CliResult<()> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if cfg.scenario != scenario {
        // the subcommand decides; the file's own kind only sets defaults
        cfg.scenario = scenario;
        cfg.validate()?;
    }
    let out = args.out.or_else(|| cfg.output.clone());
    let output = run(&cfg)?;
    write_output(&output, out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match cli.command {
        Command::Levels(a) => (Scenario::Levels, a),
        Command::Dynamics(a) => (Scenario::Dynamics, a),
        Command::Spectrum(a) => (Scenario::Spectrum, a),
        Command::Splitting(a) => (Scenario::Splitting, a),
    };
    match execute(scenario, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dce: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

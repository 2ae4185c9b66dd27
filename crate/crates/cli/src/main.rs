use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use randsum_cli::{run, CliError, ExperimentConfig, GridConfig, Overrides, Subcommand};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "RANDSUM_OUT_DIR";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Upper bound curve on the grid.
    Bound,
    /// Monte Carlo tail, moment or stopping-time run.
    Simulate,
    /// Simulated tail against the bound, point by point.
    Verify,
    /// Exponent table for the configured (m, r[, a, b]) rows.
    Exponents,
    /// Lower-bound constructions and overlays.
    Lower,
}

/// Tail bounds, simulation and verification for normalized random sums.
///
/// Settings come from the config file; flags override it. The output
/// directory is taken from --out, then the config's `out`, then
/// RANDSUM_OUT_DIR, then `randsum-out`.
///
/// Exit codes: 0 success, 1 verification failure, 2 config error,
/// 3 numerical or I/O error.
#[derive(Debug, Parser)]
#[command(name = "randsum", version)]
struct Cli {
    command: Command,
    /// TOML experiment config.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Grid as "start:stop:step".
    #[arg(long, value_name = "A:B:STEP")]
    grid: Option<String>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("randsum: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let file = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        grid: cli.grid.as_deref().map(GridConfig::parse).transpose()?,
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let config = file.resolve(&overrides, env_out);
    let cmd = match cli.command {
        Command::Bound => Subcommand::Bound,
        Command::Simulate => Subcommand::Simulate,
        Command::Verify => Subcommand::Verify,
        Command::Exponents => Subcommand::Exponents,
        Command::Lower => Subcommand::Lower,
    };
    let outcome = run(cmd, &config)?;
    if !cli.quiet || outcome.failed {
        println!("{}", outcome.summary);
    }
    if !cli.quiet {
        println!("wrote {} and {}", outcome.written.csv.display(), outcome.written.json.display());
    }
    Ok(if outcome.failed { 1 } else { 0 })
}

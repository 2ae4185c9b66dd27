//! Self-describing output files: a CSV with `#` metadata lines and a JSON
//! report embedding the resolved config.

use std::fs;
use std::path::{Path, PathBuf};

use randsum_core::mc_verifier::RNG_NAME;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    tool: &'static str,
    tool_version: &'static str,
    subcommand: &'a str,
    config_hash: &'a str,
    seed: u64,
    rng: &'static str,
    config: &'a ExperimentConfig,
    /// Lossless form of `config` (JSON has no infinities).
    config_toml: String,
    result: &'a T,
}

/// Paths of the two files written by one run.
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Prefix lines for a CSV body.
pub fn metadata_lines(subcommand: &str, config: &ExperimentConfig) -> Result<String, CliError> {
    Ok(format!(
        "# schema_version: {SCHEMA_VERSION}\n# tool: randsum {TOOL_VERSION}\n# subcommand: {subcommand}\n# config_hash: {}\n# seed: {}\n# rng: {RNG_NAME}\n",
        config.hash()?,
        config.seed
    ))
}

/// Writes `<out>/<subcommand>.csv` and `<out>/<subcommand>.json`.
pub fn write_outputs<T: Serialize>(
    subcommand: &str,
    config: &ExperimentConfig,
    csv_body: &[u8],
    result: &T,
) -> Result<Written, CliError> {
    let dir = config.out_dir();
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let hash = config.hash()?;
    let mut csv = metadata_lines(subcommand, config)?.into_bytes();
    csv.extend_from_slice(csv_body);
    let csv_path = dir.join(format!("{subcommand}.csv"));
    fs::write(&csv_path, csv).map_err(|e| io_err(&csv_path, e))?;

    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        tool: "randsum",
        tool_version: TOOL_VERSION,
        subcommand,
        config_hash: &hash,
        seed: config.seed,
        rng: RNG_NAME,
        config,
        config_toml: config.to_toml()?,
        result,
    };
    let mut json = serde_json::to_vec_pretty(&envelope).map_err(|e| CliError::Io(format!("encoding report: {e}")))?;
    json.push(b'\n');
    let json_path = dir.join(format!("{subcommand}.json"));
    fs::write(&json_path, json).map_err(|e| io_err(&json_path, e))?;
    Ok(Written {
        csv: csv_path,
        json: json_path,
    })
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Builds a CSV body from a header and rows of preformatted cells.
pub fn csv_body(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| CliError::Io(format!("encoding CSV: {e}"));
    w.write_record(header).map_err(enc)?;
    for row in rows {
        w.write_record(&row).map_err(enc)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("encoding CSV: {e}")))
}

//! Scenario runner behind the `qh` binary.
//!
//! A scenario is a strict JSON file naming a model (`oscillator` or `spinchain`),
//! its parameters, a time grid and a list of named checks. Running it produces a
//! [`report::ResidualReport`] with one verdict per check plus plot-ready CSV series.

pub mod bundled;
pub mod checks;
pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod run;
pub mod sweep;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

pub use error::{CliError, CliResult};

use run::RunOutput;

/// Output root used when neither `--out`, `QH_OUT` nor the scenario sets one.
pub const DEFAULT_OUT: &str = "qh-out";

/// Reads a scenario from `arg`, falling back to a bundled scenario of that name.
///
/// Returns the text and the name used when the scenario has none.
pub fn load_scenario_text(arg: &str) -> CliResult<(String, String)> {
    let path = Path::new(arg);
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| arg.to_string());
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return Ok((text, stem));
    }
    match bundled::bundled(arg) {
        Some(text) => Ok((text.to_string(), stem)),
        None => Err(CliError::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such scenario file"))),
    }
}

/// Writes `report.json` and every CSV table into `dir`.
pub fn write_run(dir: &Path, out: &RunOutput) -> CliResult<Vec<PathBuf>> {
    let mut paths = output::write_tables(dir, &out.tables)?;
    let report = dir.join("report.json");
    output::write_atomic(&report, &out.report.to_json())?;
    paths.push(report);
    Ok(paths)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qh_cli::config::{apply_dt, Scenario};
use qh_cli::error::{CliError, CliResult};
use qh_cli::output::write_atomic;
use qh_cli::run::run_scenario;
use qh_cli::sweep::{parse_values, sweep};
use qh_cli::verify::verify;
use qh_cli::{load_scenario_text, write_run, DEFAULT_OUT};

/// Time-dependent Dyson and quasi-Hermiticity checks for the oscillator and Yang–Lee chain models.
///
/// Exit status: 0 all checks pass, 1 some check failed, 2 configuration error,
/// 3 numerical breakdown.
#[derive(Parser)]
#[command(name = "qh", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file (or bundled scenario name) and write CSV series plus report.json.
    Run {
        scenario: String,
        /// Output root; files go to <out>/<scenario name>/.
        #[arg(long, env = "QH_OUT")]
        out: Option<PathBuf>,
        /// Override the grid step.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run a scenario once per parameter value and tabulate the verdicts.
    Sweep {
        scenario: String,
        /// Dotted parameter path, looked up under `params` first (`delta0`, `grid.t1`, `dt`).
        #[arg(long)]
        param: String,
        /// Comma-separated list or inclusive range start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, env = "QH_OUT")]
        out: Option<PathBuf>,
    },
    /// Run every bundled scenario and print a summary.
    Verify {
        /// Force every tolerance to this value.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Also write each scenario's outputs under this root.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(arg: &str, dt: Option<f64>) -> CliResult<Scenario> {
    let (text, stem) = load_scenario_text(arg)?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::config(".", e.to_string()))?;
    if let Some(dt) = dt {
        apply_dt(&mut value, dt)?;
    }
    Scenario::from_value(value, &stem)
}

fn out_root(flag: Option<PathBuf>, scenario: Option<&Scenario>) -> PathBuf {
    flag.or_else(|| scenario.and_then(|s| s.outputs.clone())).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn cmd_run(arg: &str, out: Option<PathBuf>, dt: Option<f64>) -> CliResult<i32> {
    let scenario = load(arg, dt)?;
    let result = run_scenario(&scenario)?;
    let dir = out_root(out, Some(&scenario)).join(&scenario.name);
    let paths = write_run(&dir, &result)?;
    println!("{} ({})", scenario.name, result.report.scenario_hash);
    for line in result.report.summary_lines() {
        println!("  {line}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(result.report.exit_code())
}

fn cmd_sweep(arg: &str, param: &str, values: &str, out: Option<PathBuf>) -> CliResult<i32> {
    let values = parse_values(values)?;
    let (text, stem) = load_scenario_text(arg)?;
    let base: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::config(".", e.to_string()))?;
    let scenario = Scenario::from_value(base.clone(), &stem)?;
    let table = sweep(&base, &stem, param, &values)?;
    let dir = out_root(out, Some(&scenario)).join(format!("{}-sweep-{}", scenario.name, param.replace('.', "_")));
    let csv = table.to_csv();
    print!("{csv}");
    write_atomic(&dir.join("sweep.csv"), &csv)?;
    let json = serde_json::to_string_pretty(&table).expect("sweep serializes") + "\n";
    write_atomic(&dir.join("sweep.json"), &json)?;
    println!("wrote {}", dir.display());
    Ok(0)
}

fn cmd_verify(tolerance: Option<f64>, out: Option<PathBuf>) -> CliResult<i32> {
    if let Some(tol) = tolerance {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::config("--tolerance", format!("{tol} must be positive and finite")));
        }
    }
    let outcome = verify(tolerance);
    println!("{}", outcome.summary());
    if let Some(root) = out {
        for (name, r) in &outcome.runs {
            if let Ok(result) = r {
                write_run(&root.join(name), result)?;
            }
        }
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, dt } => cmd_run(&scenario, out, dt),
        Command::Sweep { scenario, param, values, out } => cmd_sweep(&scenario, &param, &values, out),
        Command::Verify { tolerance, out } => cmd_verify(tolerance, out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

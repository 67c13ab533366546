//! Runs every bundled scenario and summarizes the verdicts.

use rayon::prelude::*;

use crate::bundled::BUNDLED;
use crate::config::Scenario;
use crate::error::CliResult;
use crate::run::{run_scenario, RunOutput};

pub struct VerifyOutcome {
    pub runs: Vec<(&'static str, CliResult<RunOutput>)>,
}

/// Runs the bundled suite, optionally forcing every tolerance to `tolerance`.
pub fn verify(tolerance: Option<f64>) -> VerifyOutcome {
    let runs = BUNDLED
        .par_iter()
        .map(|&(name, text)| {
            let outcome = Scenario::from_json(text, name).and_then(|mut s| {
                if let Some(tol) = tolerance {
                    s.override_tolerances(tol);
                }
                run_scenario(&s)
            });
            (name, outcome)
        })
        .collect();
    VerifyOutcome { runs }
}

impl VerifyOutcome {
    /// Worst exit code over the suite.
    pub fn exit_code(&self) -> i32 {
        self.runs
            .iter()
            .map(|(_, r)| match r {
                Ok(out) => out.report.exit_code(),
                Err(e) => e.exit_code(),
            })
            .max()
            .unwrap_or(0)
    }

    pub fn summary(&self) -> String {
        let mut lines = Vec::new();
        let (mut passed, mut total) = (0, 0);
        for (name, r) in &self.runs {
            match r {
                Ok(out) => {
                    lines.push(format!("{name} [{}]", out.report.scenario_hash.get(..12).unwrap_or("")));
                    for line in out.report.summary_lines() {
                        lines.push(format!("  {line}"));
                    }
                    total += out.report.checks.len();
                    passed += out.report.checks.iter().filter(|c| c.verdict == crate::report::Verdict::Pass).count();
                }
                Err(e) => lines.push(format!("{name}: ERROR {e}")),
            }
        }
        lines.push(format!("verify: {passed} of {total} checks passed"));
        lines.join("\n")
    }
}

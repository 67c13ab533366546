//! Per-check verdicts and the JSON report written next to the trajectories.

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use qh_core::TimeGrid;

use crate::checks::CheckName;
use crate::config::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The computation behind the check broke down (positivity lost, blowup, ...).
    Breakdown,
}

/// Non-finite values serialize as `"inf"`, `"-inf"` or `"nan"` since JSON has no literal for them.
fn finite_or_tag<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: CheckName,
    #[serde(serialize_with = "finite_or_tag")]
    pub value: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckOutcome {
    /// Pass iff `value ≤ tolerance`; NaN never passes.
    pub fn judge(name: CheckName, value: f64, tolerance: f64) -> Self {
        let verdict = if value <= tolerance { Verdict::Pass } else { Verdict::Fail };
        CheckOutcome { name, value, tolerance, verdict, error: None }
    }

    pub fn breakdown(name: CheckName, tolerance: f64, error: &qh_core::Error) -> Self {
        CheckOutcome { name, value: f64::NAN, tolerance, verdict: Verdict::Breakdown, error: Some(error.to_string()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub scenario: String,
    pub model: &'static str,
    /// SHA-256 of the canonical scenario JSON.
    pub scenario_hash: String,
    pub code_version: &'static str,
    pub grid: TimeGrid,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

impl ResidualReport {
    pub fn new(scenario: &Scenario, checks: Vec<CheckOutcome>) -> Self {
        let passed = checks.iter().all(|c| c.verdict == Verdict::Pass);
        ResidualReport {
            scenario: scenario.name.clone(),
            model: scenario.model.kind().label(),
            scenario_hash: scenario_hash(scenario),
            code_version: env!("CARGO_PKG_VERSION"),
            grid: scenario.grid,
            checks,
            passed,
        }
    }

    /// 0 all pass, 1 some verdict failed, 3 some check broke down.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.verdict == Verdict::Breakdown) {
            3
        } else if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check, for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let tag = match c.verdict {
                    Verdict::Pass => "PASS",
                    Verdict::Fail => "FAIL",
                    Verdict::Breakdown => "BREAKDOWN",
                };
                match &c.error {
                    Some(e) => format!("{tag:<9} {:<20} {e}", c.name.name()),
                    None => format!("{tag:<9} {:<20} {:.3e} <= {:e}", c.name.name(), c.value, c.tolerance),
                }
            })
            .collect()
    }
}

pub fn scenario_hash(scenario: &Scenario) -> String {
    hex::encode(Sha256::digest(scenario.canonical_json().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_follow_tolerance() {
        assert_eq!(CheckOutcome::judge(CheckName::ImF, 1e-13, 1e-12).verdict, Verdict::Pass);
        assert_eq!(CheckOutcome::judge(CheckName::ImF, 1e-12, 1e-12).verdict, Verdict::Pass);
        assert_eq!(CheckOutcome::judge(CheckName::ImF, 2e-12, 1e-12).verdict, Verdict::Fail);
        assert_eq!(CheckOutcome::judge(CheckName::ImF, f64::NAN, 1e-12).verdict, Verdict::Fail);
    }

    #[test]
    fn non_finite_values_are_tagged() {
        let c = CheckOutcome::judge(CheckName::ImF, f64::INFINITY, 1.0);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"value\":\"inf\""), "{s}");
        let c = CheckOutcome::breakdown(CheckName::Positivity, 1.0, &qh_core::Error::Blowup { t: 1.0, value: 2.0 });
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"value\":\"nan\"") && s.contains("\"verdict\":\"breakdown\""), "{s}");
    }
}

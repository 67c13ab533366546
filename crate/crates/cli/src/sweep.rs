//! One scenario, one parameter, many values. Rows run in parallel and come back in input order.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::checks::CheckName;
use crate::config::{has_parameter, set_parameter, Scenario};
use crate::error::{CliError, CliResult};
use crate::report::{ResidualReport, Verdict};
use crate::run::run_scenario;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ResidualReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn passed(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.passed)
    }

    pub fn check(&self, c: CheckName) -> Option<(f64, Verdict)> {
        let report = self.report.as_ref()?;
        report.checks.iter().find(|o| o.name == c).map(|o| (o.value, o.verdict))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

/// Parses `0.5,0.75,1` or the inclusive range `start:stop:step`.
pub fn parse_values(list: &str) -> CliResult<Vec<f64>> {
    let bad = |m: String| CliError::config("--values", m);
    let list = list.trim();
    if list.is_empty() {
        return Err(bad("empty value list".into()));
    }
    let parse = |s: &str| match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(x) => Err(bad(format!("`{s}` is not finite ({x})"))),
        Err(e) => Err(bad(format!("`{s}`: {e}"))),
    };
    if list.contains(':') {
        let parts: Vec<f64> = list.split(':').map(parse).collect::<CliResult<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad("ranges are written start:stop:step".into()));
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad(format!("empty range {list}")));
        }
        // tolerate rounding at the end point
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| start + step * k as f64).collect());
    }
    list.split(',').map(parse).collect()
}

fn row(base: &Value, name: &str, parameter: &str, x: f64) -> SweepRow {
    let outcome = (|| {
        let mut v = base.clone();
        set_parameter(&mut v, parameter, x)?;
        let s = Scenario::from_value(v, name)?;
        Ok::<_, CliError>(run_scenario(&s)?.report)
    })();
    match outcome {
        Ok(report) => SweepRow { value: x, report: Some(report), error: None },
        Err(e) => SweepRow { value: x, report: None, error: Some(e.to_string()) },
    }
}

pub fn sweep(base: &Value, name: &str, parameter: &str, values: &[f64]) -> CliResult<SweepTable> {
    if values.is_empty() {
        return Err(CliError::config("--values", "empty value list"));
    }
    Scenario::from_value(base.clone(), name)?;
    if !has_parameter(base, parameter) {
        return Err(CliError::config(parameter, "no such numeric parameter in the scenario"));
    }
    let rows = values.par_iter().map(|&x| row(base, name, parameter, x)).collect();
    Ok(SweepTable { parameter: parameter.to_string(), rows })
}

impl SweepTable {
    /// Checks present in any row, in canonical order.
    pub fn checks(&self) -> Vec<CheckName> {
        CheckName::ALL
            .into_iter()
            .filter(|&c| self.rows.iter().any(|r| r.check(c).is_some()))
            .collect()
    }

    /// Value column, `passed`, then a value and a verdict column per check, then `error`.
    pub fn to_csv(&self) -> String {
        let checks = self.checks();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.parameter.clone(), "passed".to_string()];
        for c in &checks {
            header.push(c.name().to_string());
            header.push(format!("{}_verdict", c.name()));
        }
        header.push("error".to_string());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![format!("{:.16e}", r.value), r.passed().to_string()];
            for &c in &checks {
                match r.check(c) {
                    Some((v, verdict)) => {
                        rec.push(format!("{v:.16e}"));
                        rec.push(serde_json::to_value(verdict).expect("verdict").as_str().unwrap_or("").to_string());
                    }
                    None => rec.extend([String::new(), String::new()]),
                }
            }
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

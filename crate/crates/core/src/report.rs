//! Run reports and their two renderings.
//!
//! The machine rendering is a JSON document with `"schemaVersion": 1`; every
//! float is rounded to 12 significant digits so that reports are stable
//! across platforms and re-parse to the same numbers. Timing appears only in
//! the human rendering, which keeps machine reports byte-deterministic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, Mode};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub label: String,
    pub samples: u64,
    pub accepted: u64,
    pub pass_rate: f64,
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    #[serde(rename = "schemaVersion")]
    pub schema_version: u32,
    pub mode: Mode,
    pub passed: bool,
    pub config: ExperimentConfig,
    /// Residuals and other quantities compared against a tolerance.
    pub residual: BTreeMap<String, f64>,
    /// Pass/fail of each named check.
    pub checks: BTreeMap<String, bool>,
    /// Fidelities and bounds.
    pub bounds: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestRow>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, Value>,
    #[serde(skip)]
    pub elapsed: Option<Duration>,
}

impl Report {
    pub fn new(mode: Mode, config: ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            mode,
            passed: true,
            config,
            residual: BTreeMap::new(),
            checks: BTreeMap::new(),
            bounds: BTreeMap::new(),
            tests: Vec::new(),
            info: BTreeMap::new(),
            elapsed: None,
        }
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), ok);
        self.passed &= ok;
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        self.residual.insert(name.to_string(), value);
    }

    pub fn bound(&mut self, name: &str, value: f64) {
        self.bounds.insert(name.to_string(), value);
    }

    pub fn info(&mut self, name: &str, value: impl Serialize) {
        self.info.insert(name.to_string(), serde_json::to_value(value).expect("info values serialize"));
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round12(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// `%.12g`-style formatting.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        let e: i32 = e.parse().unwrap();
        return format!("{mantissa}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn table(out: &mut String, title: &str, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
    for row in rows {
        let _ = writeln!(out, "{}", line(row));
    }
    out.push('\n');
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Machine => {
            let mut v = serde_json::to_value(report).expect("reports serialize");
            round_floats(&mut v);
            let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "sepstab {}  {}", report.mode, if report.passed { "PASS" } else { "FAIL" });
            out.push('\n');
            let rows: Vec<Vec<String>> = report.residual.iter().map(|(k, v)| vec![k.clone(), fmt_g(*v)]).collect();
            table(&mut out, "Residuals", &["name", "value"], &rows);
            if !report.bounds.is_empty() {
                let rows: Vec<Vec<String>> = report.bounds.iter().map(|(k, v)| vec![k.clone(), fmt_g(*v)]).collect();
                table(&mut out, "Bounds", &["name", "value"], &rows);
            }
            if !report.tests.is_empty() {
                let rows: Vec<Vec<String>> = report
                    .tests
                    .iter()
                    .map(|t| {
                        vec![
                            t.label.clone(),
                            t.samples.to_string(),
                            t.accepted.to_string(),
                            fmt_g(t.pass_rate),
                            fmt_g(t.exact),
                        ]
                    })
                    .collect();
                table(&mut out, "Tests", &["test", "samples", "accepted", "pass_rate", "exact"], &rows);
            }
            if !report.checks.is_empty() {
                let rows: Vec<Vec<String>> = report
                    .checks
                    .iter()
                    .map(|(k, v)| vec![k.clone(), if *v { "pass" } else { "FAIL" }.to_string()])
                    .collect();
                table(&mut out, "Checks", &["check", "result"], &rows);
            }
            for (k, v) in &report.info {
                let _ = writeln!(out, "{k}: {v}");
            }
            if let Some(t) = report.elapsed {
                let _ = writeln!(out, "elapsed: {} s", fmt_g(round12(t.as_secs_f64())));
            }
            out
        }
    }
}

/// Reads a machine report back.
pub fn parse_report(text: &str) -> crate::Result<Report> {
    serde_json::from_str(text).map_err(|e| crate::Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn sample() -> Report {
        let cfg = parse_config("[target]\ngenerator = \"bell\"\n").unwrap();
        Report::new(Mode::Construct, cfg)
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_g(0.1 + 0.2), "0.3");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(2.0 / 3.0 * 1e-13), "6.66666666667e-14");
        assert_eq!(fmt_g(1234.5), "1234.5");
        assert_eq!(fmt_g(-1.0), "-1");
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn empty_residual_table_is_header_only() {
        let out = emit_report(&sample(), Format::Human);
        let lines: Vec<&str> = out.lines().collect();
        let at = lines.iter().position(|l| *l == "Residuals").unwrap();
        assert_eq!(lines[at + 1], "name  value");
        assert_eq!(lines[at + 2], "");
    }

    #[test]
    fn machine_schema_and_round_trip() {
        let mut r = sample();
        r.residual("PQ_minus_psi", 1.0 / 7.0 * 1e-16);
        r.residual("commutator", 0.0);
        r.bound("fidelity_squared", 2.0 / 3.0);
        r.check("stabilizer", true);
        r.info("schmidt_coefficients", vec![0.5, 0.5]);
        r.tests.push(TestRow {
            label: "P".into(),
            samples: 10,
            accepted: 7,
            pass_rate: 0.7,
            exact: 0.7123456789012345,
        });
        let doc = emit_report(&r, Format::Machine);
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["schemaVersion"], 1);
        assert!(v["residual"]["PQ_minus_psi"].is_number());
        assert!(v["residual"]["commutator"].is_number());

        let back = parse_report(&doc).unwrap();
        assert_eq!(back.bounds["fidelity_squared"], round12(2.0 / 3.0));
        assert_eq!(back.tests[0].exact, round12(0.7123456789012345));
        assert_eq!(emit_report(&back, Format::Machine), doc);
    }
}

//! Machine-readable experiment report, schema `v1`.
//!
//! Wall-clock timings are deliberately not part of the report so that a
//! rerun with the same configuration reproduces it byte for byte.

use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;

pub const SCHEMA: &str = "v1";

/// How a measured value is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, comparison: Comparison, threshold: f64) -> Check {
        // NaN fails every comparison.
        let passed = match comparison {
            Comparison::AtMost => measured <= threshold,
            Comparison::AtLeast => measured >= threshold,
            Comparison::Equal => measured == threshold,
        };
        Check { name: name.into(), measured, comparison, threshold, passed, note: None }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Check {
        Check::new(name, measured, Comparison::AtMost, threshold)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Check {
        Check::new(name, measured, Comparison::AtLeast, threshold)
    }

    pub fn equal(name: impl Into<String>, measured: f64, threshold: f64) -> Check {
        Check::new(name, measured, Comparison::Equal, threshold)
    }

    /// A check that could not be measured because the computation failed.
    pub fn failed(name: impl Into<String>, comparison: Comparison, threshold: f64, why: String) -> Check {
        Check { name: name.into(), measured: f64::NAN, comparison, threshold, passed: false, note: Some(why) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }
}

/// Extra measured quantity that is reported but not checked.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
}

/// CSV side file produced by a suite.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub grid: Option<(usize, usize)>,
    pub checks: Vec<Check>,
    pub measurements: Vec<Measurement>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl SuiteReport {
    pub fn new(suite: &str, grid: Option<(usize, usize)>) -> SuiteReport {
        SuiteReport { suite: suite.to_string(), grid, checks: Vec::new(), measurements: Vec::new(), artifacts: Vec::new() }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn measure(&mut self, name: impl Into<String>, value: f64) {
        self.measurements.push(Measurement { name: name.into(), value });
    }

    pub fn artifact(&mut self, file_name: impl Into<String>, contents: String) {
        self.artifacts.push(Artifact { file_name: file_name.into(), contents });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    /// Definition of the negative Sobolev norm surrogate used in the report.
    pub w_minus1_surrogate: &'static str,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, suites: Vec<SuiteReport>) -> ExperimentReport {
        let passed = suites.iter().all(SuiteReport::passed);
        ExperimentReport {
            schema: SCHEMA,
            config,
            w_minus1_surrogate: "||grad (-Delta)^-1 f||_Lp",
            suites,
            passed,
        }
    }

    pub fn checks(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.suites.iter().flat_map(|s| s.checks.iter().map(move |c| (s.suite.as_str(), c)))
    }

    pub fn failed_checks(&self) -> Vec<String> {
        self.checks().filter(|(_, c)| !c.passed).map(|(s, c)| format!("{s}/{}", c.name)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Write the JSON report to `path` and every CSV artifact next to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for suite in &self.suites {
            for a in &suite.artifacts {
                std::fs::write(dir.join(&a.file_name), &a.contents)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Check::at_most("a", 1e-12, 1e-10).passed);
        assert!(!Check::at_most("a", f64::NAN, 1e-10).passed);
        assert!(Check::at_least("b", 1.0, 1.0 - 1e-10).passed);
        assert!(Check::equal("c", 16.0, 16.0).passed);
        assert!(!Check::equal("c", 15.0, 16.0).passed);
    }

    #[test]
    fn json_has_schema_and_no_timing() {
        let mut s = SuiteReport::new("kernel", None);
        s.check(Check::equal("kernel_dim", 16.0, 16.0));
        let r = ExperimentReport::new(ExperimentConfig::default(), vec![s]);
        let j = r.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["schema"], "v1");
        assert_eq!(v["passed"], true);
        assert_eq!(v["suites"][0]["checks"][0]["comparison"], "==");
        assert!(!j.contains("time"));
    }

    #[test]
    fn failing_check_fails_report() {
        let mut s = SuiteReport::new("x", None);
        s.check(Check::failed("y", Comparison::AtMost, 1.0, "boom".into()));
        let r = ExperimentReport::new(ExperimentConfig::default(), vec![s]);
        assert!(!r.passed);
        assert_eq!(r.failed_checks(), vec!["x/y".to_string()]);
        // NaN is written as null.
        assert!(r.to_json().unwrap().contains("\"measured\": null"));
    }
}

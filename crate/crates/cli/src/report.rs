//! Run reports and checks.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    /// How `measured` is compared: `<=`, `>=`, `<` or `==`.
    pub relation: &'static str,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured <= threshold, measured, "<=", threshold)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured >= threshold, measured, ">=", threshold)
    }

    pub fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured < threshold, measured, "<", threshold)
    }

    /// A yes/no condition, recorded as 1 or 0 against 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, ok, if ok { 1.0 } else { 0.0 }, "==", 1.0)
    }

    fn new(name: impl Into<String>, passed: bool, measured: f64, relation: &'static str, threshold: f64) -> Self {
        Self { name: name.into(), passed, measured, relation, threshold, note: None }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// What an experiment hands back before it is wrapped into a [`RunReport`].
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub refusals: Vec<String>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: &'static str,
    pub passed: bool,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub refusals: Vec<String>,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

//! The `report.json` document.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::{ScenarioConfig, DEFAULTS_VERSION};
use crate::output::with_path;

/// A checked quantity: passes when `|value - expected| <= tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metric {
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Metric {
    pub fn new(value: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (value - expected).abs() <= tolerance;
        Metric { value, expected, tolerance, pass }
    }

    /// For non-negative deviations that must stay under `bound`.
    pub fn at_most(value: f64, bound: f64) -> Self {
        Metric::new(value, 0.0, bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub defaults_version: String,
    pub pwlab_version: String,
    pub config: ScenarioConfig,
    pub metrics: BTreeMap<String, Metric>,
    /// Diagnostic values that are reported but not checked.
    pub observations: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
    pub error: Option<ErrorInfo>,
    pub wall_time_s: f64,
    pub pass: bool,
}

impl RunReport {
    pub fn new(config: &ScenarioConfig) -> Self {
        RunReport {
            scenario: config.scenario.name().to_string(),
            defaults_version: DEFAULTS_VERSION.to_string(),
            pwlab_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            metrics: BTreeMap::new(),
            observations: BTreeMap::new(),
            outputs: Vec::new(),
            error: None,
            wall_time_s: 0.0,
            pass: false,
        }
    }

    pub fn metric(&mut self, name: &str, m: Metric) {
        self.metrics.insert(name.to_string(), m);
    }

    pub fn observe(&mut self, name: &str, value: f64) {
        self.observations.insert(name.to_string(), value);
    }

    pub fn all_pass(&self) -> bool {
        self.error.is_none() && !self.metrics.is_empty() && self.metrics.values().all(|m| m.pass)
    }

    pub fn write_file(&self, dir: &Path) -> std::io::Result<()> {
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| with_path(e, &path))
    }
}

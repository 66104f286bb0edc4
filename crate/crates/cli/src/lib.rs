//! Command-line front end for the pwlab scenarios: configuration, seeded
//! execution, `report.json` and CSV plot data.

pub mod config;
pub mod output;
pub mod report;
mod scenarios;

use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

pub use config::{ConfigError, Overrides, Scenario, ScenarioConfig, DEFAULTS_VERSION};
pub use output::{fmt_g17, CsvTable};
pub use report::{ErrorInfo, Metric, RunReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_METRIC_FAILED: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL_FAILURE: i32 = 3;

/// A finished run: the report plus the tables it refers to.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub tables: Vec<CsvTable>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.error.is_some() {
            EXIT_NUMERICAL_FAILURE
        } else if self.report.all_pass() {
            EXIT_PASS
        } else {
            EXIT_METRIC_FAILED
        }
    }
}

fn error_kind(e: &pwlab_core::Error) -> String {
    let debug = format!("{e:?}");
    debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

/// Runs the scenario in memory. Module errors are recorded in the report
/// rather than returned; tables produced before the failure are kept.
pub fn run_scenario(config: &ScenarioConfig) -> RunOutcome {
    let start = Instant::now();
    let mut report = RunReport::new(config);
    let mut tables = Vec::new();
    if let Err(e) = scenarios::run(config, &mut report, &mut tables) {
        report.error = Some(ErrorInfo { kind: error_kind(&e), message: e.to_string() });
    }
    report.outputs = tables.iter().map(|t| t.name.clone()).collect();
    report.pass = report.all_pass();
    report.wall_time_s = start.elapsed().as_secs_f64();
    RunOutcome { report, tables }
}

/// Writes every table and then `report.json` into `dir`, creating it.
pub fn emit_plot_data(outcome: &RunOutcome, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir).map_err(|e| output::with_path(e, dir))?;
    for table in &outcome.tables {
        table.write_file(dir)?;
    }
    outcome.report.write_file(dir)
}

/// Sizes the global worker pool from `PWLAB_THREADS` (unset or 0 = one per core).
pub fn configure_threads(value: Option<&str>) -> Result<(), ConfigError> {
    let threads = match value {
        None => return Ok(()),
        Some(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| ConfigError(format!("PWLAB_THREADS must be a non-negative integer, got '{v}'")))?,
    };
    if threads > 0 {
        // A second initialization only fails when a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

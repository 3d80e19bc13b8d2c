//! Runs the CHSH experiments and writes JSON or CSV reports.

pub mod config;
pub mod experiments;
pub mod report;

use std::time::Instant;

use serde_json::{json, Value};

use config::{Format, RunConfig};
use experiments::{run_experiment, EffectiveSettings};

pub use chsh_core::ChshError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

pub struct RunOutput {
    pub report: Value,
    /// The report rendered in the requested format.
    pub text: String,
    pub all_passed: bool,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.all_passed {
            EXIT_OK
        } else {
            EXIT_ASSERTION
        }
    }
}

pub fn run(config: &RunConfig) -> Result<RunOutput, ChshError> {
    let start = Instant::now();
    let settings = EffectiveSettings::from_config(config);

    let mut results = serde_json::Map::new();
    let mut assertions = Vec::new();
    let mut tsirelson_ok = true;
    for which in config.experiment.expand() {
        let outcome = run_experiment(which, &settings)?;
        tsirelson_ok &= outcome.section.tsirelson_ok;
        results.insert(which.name().to_owned(), json!(outcome.section));
        assertions.extend(outcome.assertions);
    }
    let all_passed = assertions.iter().all(|a| a.passed);

    let config_echo = report::object(vec![
        ("experiment", json!(config.experiment)),
        ("format", json!(config.format)),
        ("out", json!(config.out.display().to_string())),
        ("seed", json!(config.seed)),
        ("budget", json!(config.budget)),
        ("tol", json!(config.tol)),
        ("effective", json!(settings)),
    ]);
    let report = report::object(vec![
        ("experiment", json!(config.experiment.name())),
        ("artifact_version", json!(env!("CARGO_PKG_VERSION"))),
        ("config", config_echo),
        ("results", Value::Object(results)),
        ("assertions", json!(assertions)),
        ("tsirelson_ok", json!(tsirelson_ok)),
        (report::WALL_TIME_FIELD, json!(start.elapsed().as_secs_f64())),
    ]);
    let text = match config.format {
        Format::Json => report::to_json(&report),
        Format::Csv => report::to_csv(&report),
    };
    Ok(RunOutput {
        report,
        text,
        all_passed,
    })
}

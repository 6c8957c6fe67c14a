//! Reproducible experiments: configurations, runners and versioned JSON reports.
//!
//! Every run is a pure function of its configuration. The only
//! nondeterministic part of a [`Report`] is its `timing` block.

mod config;
mod run;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{
    AnalyzeConfig, ConjugateConfig, ContextArgs, CounterexampleConfig, ExperimentConfig, OracleToggle, ShadowConfig,
    SuiteConfig, Theorem,
};
pub use run::{parse_checks, AnalysisCheck};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "padyn-report/1";

/// One asserted invariant, aggregated over the cases that instantiate it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub invariant: String,
    pub passed: bool,
    pub checked: u64,
    pub failed: u64,
    /// Detail of the first failing case.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub cases: Vec<serde_json::Value>,
    pub summary: Vec<Check>,
    pub passed: bool,
    pub timing: Timing,
}

impl Report {
    /// The report without its timing block, for comparing re-runs.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::BadParams(e.to_string()))?;
        if let Some(o) = v.as_object_mut() {
            o.remove("timing");
        }
        serde_json::to_string_pretty(&v).map_err(|e| Error::BadParams(e.to_string()))
    }

    pub fn failed_invariants(&self) -> Vec<&str> {
        self.summary.iter().filter(|c| !c.passed).map(|c| c.invariant.as_str()).collect()
    }
}

/// Accumulates per-case checks into the summary, in first-seen order.
#[derive(Default, Debug)]
pub(crate) struct Tally {
    checks: Vec<Check>,
}

impl Tally {
    pub(crate) fn record(&mut self, invariant: &str, passed: bool, detail: impl FnOnce() -> String) {
        let idx = match self.checks.iter().position(|c| c.invariant == invariant) {
            Some(i) => i,
            None => {
                self.checks.push(Check {
                    invariant: invariant.to_string(),
                    passed: true,
                    checked: 0,
                    failed: 0,
                    first_failure: None,
                });
                self.checks.len() - 1
            }
        };
        let c = &mut self.checks[idx];
        c.checked += 1;
        if !passed {
            c.passed = false;
            c.failed += 1;
            if c.first_failure.is_none() {
                c.first_failure = Some(detail());
            }
        }
    }

    pub(crate) fn absorb(&mut self, prefix: &str, other: &[Check]) {
        for c in other {
            let mut c = c.clone();
            c.invariant = format!("{prefix}.{}", c.invariant);
            self.checks.push(c);
        }
    }

    pub(crate) fn into_checks(self) -> Vec<Check> {
        self.checks
    }
}

/// Runs a configuration. Errors are configuration errors; invariant
/// failures are reported through `Report::passed`.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let (cases, summary) = run::dispatch(config)?;
    let passed = summary.iter().all(|c| c.passed);
    Ok(Report {
        schema: SCHEMA.to_string(),
        command: config.command().to_string(),
        config: config.clone(),
        cases,
        summary,
        passed,
        timing: Timing { wall_ms: start.elapsed().as_millis() as u64 },
    })
}

/// Sizes the global worker pool. `None` keeps rayon's default.
pub fn configure_workers(workers: Option<usize>) -> Result<()> {
    let Some(n) = workers else { return Ok(()) };
    if n == 0 {
        return Err(Error::BadParams("worker count must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::BadParams(format!("worker pool: {e}")))
}

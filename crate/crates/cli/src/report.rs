//! Suite reports: the JSON schema and the human-readable one-liners.
//!
//! JSON numbers carry 3 significant digits (constants 9) so that reports are
//! compact, scriptable, and byte-identical across runs of the same seed.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub constants: BTreeMap<String, f64>,
}

impl SuiteReport {
    pub fn new(
        suite: &str,
        trials: u64,
        max_residual: f64,
        tolerance: f64,
        constants: BTreeMap<String, f64>,
    ) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            trials,
            max_residual: sig3(max_residual),
            tolerance,
            pass: max_residual <= tolerance,
            constants: constants.into_iter().map(|(k, v)| (k, sig9(v))).collect(),
        }
    }

    pub fn human_line(&self, wall: Duration) -> String {
        let mut line = format!(
            "suite={} trials={} max_residual={:.2e} tol={:.2e} {} ({:.2}s)",
            self.suite,
            self.trials,
            self.max_residual,
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" },
            wall.as_secs_f64(),
        );
        if !self.constants.is_empty() {
            let consts: Vec<String> = self
                .constants
                .iter()
                .map(|(k, v)| format!("{k}={v:.3e}"))
                .collect();
            line.push_str(&format!(" [{}]", consts.join(" ")));
        }
        line
    }
}

/// One negative control: the suite re-run with its designated planted bug,
/// which must FAIL.
#[derive(Clone, Debug, Serialize)]
pub struct NegativeControl {
    pub suite: String,
    pub mutation: String,
    pub failed_as_expected: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfTestReport {
    pub seed: u64,
    pub extended: bool,
    pub suites: Vec<SuiteReport>,
    pub negative_controls: Vec<NegativeControl>,
    pub pass: bool,
}

/// Round to 3 significant decimal digits (deterministic via formatting).
pub fn sig3(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.2e}").parse().unwrap_or(x)
}

/// Round to 9 significant decimal digits (for recorded constants).
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

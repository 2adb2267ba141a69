//! Machine-readable verification reports.
//!
//! Every verification suite produces a [`RunReport`]: a list of named checks
//! with pass/fail status, rendered sides on failure and an optional
//! coboundary witness when equality holds modulo Im d. Reports are sorted by
//! check id so repeated runs over identical inputs are byte-identical;
//! timings are kept out of the default serialisation for the same reason.

use rayon::prelude::*;
use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    /// Equality holds modulo Im d; the witness w satisfies defect = d(w).
    PassModD { witness: String },
    Fail { lhs: String, rhs: String },
    Error { message: String },
}

impl CheckStatus {
    pub fn is_pass(&self) -> bool {
        matches!(self, CheckStatus::Pass | CheckStatus::PassModD { .. })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    #[serde(flatten)]
    pub status: CheckStatus,
    #[serde(skip)]
    pub timing_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub schema_version: u32,
    pub n: usize,
    pub command: String,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl RunReport {
    pub fn new(n: usize, command: &str) -> RunReport {
        RunReport {
            tool_version: TOOL_VERSION.to_string(),
            schema_version: 1,
            n,
            command: command.to_string(),
            checks: Vec::new(),
            passed: 0,
            failed: 0,
        }
    }

    pub fn push(&mut self, id: &str, status: CheckStatus) {
        self.push_timed(id, status, 0);
    }

    pub fn push_timed(&mut self, id: &str, status: CheckStatus, timing_ms: u128) {
        if status.is_pass() {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        self.checks.push(Check {
            id: id.to_string(),
            status,
            timing_ms,
        });
    }

    /// Run independent checks concurrently and merge deterministically
    /// (sorted by check id).
    pub fn run_all<F>(&mut self, jobs: Vec<(String, F)>)
    where
        F: Fn() -> CheckStatus + Send + Sync,
    {
        let mut results: Vec<(String, CheckStatus, u128)> = jobs
            .into_par_iter()
            .map(|(id, f)| {
                let t0 = std::time::Instant::now();
                let status = f();
                (id, status, t0.elapsed().as_millis())
            })
            .collect();
        results.sort_by(|a, b| a.0.cmp(&b.0));
        for (id, status, ms) in results {
            self.push_timed(&id, status, ms);
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn merge(&mut self, other: RunReport) {
        for c in other.checks {
            if c.status.is_pass() {
                self.passed += 1;
            } else {
                self.failed += 1;
            }
            self.checks.push(c);
        }
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn to_json(&self, timings: bool) -> String {
        if timings {
            #[derive(Serialize)]
            struct TimedCheck<'a> {
                id: &'a str,
                #[serde(flatten)]
                status: &'a CheckStatus,
                timing_ms: u128,
            }
            #[derive(Serialize)]
            struct TimedReport<'a> {
                tool_version: &'a str,
                schema_version: u32,
                n: usize,
                command: &'a str,
                checks: Vec<TimedCheck<'a>>,
                passed: usize,
                failed: usize,
            }
            let t = TimedReport {
                tool_version: &self.tool_version,
                schema_version: self.schema_version,
                n: self.n,
                command: &self.command,
                checks: self
                    .checks
                    .iter()
                    .map(|c| TimedCheck {
                        id: &c.id,
                        status: &c.status,
                        timing_ms: c.timing_ms,
                    })
                    .collect(),
                passed: self.passed,
                failed: self.failed,
            };
            serde_json::to_string_pretty(&t).expect("report serialisation")
        } else {
            serde_json::to_string_pretty(self).expect("report serialisation")
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            match &c.status {
                CheckStatus::Pass => out.push_str(&format!("[PASS] {}\n", c.id)),
                CheckStatus::PassModD { witness } => {
                    out.push_str(&format!("[PASS] {} (mod d, witness: {})\n", c.id, witness))
                }
                CheckStatus::Fail { lhs, rhs } => out.push_str(&format!(
                    "[FAIL] {}\n       lhs = {}\n       rhs = {}\n",
                    c.id, lhs, rhs
                )),
                CheckStatus::Error { message } => {
                    out.push_str(&format!("[ERROR] {}: {}\n", c.id, message))
                }
            }
        }
        out.push_str(&format!(
            "summary: {} passed, {} failed (N={})\n",
            self.passed, self.failed, self.n
        ));
        out
    }
}

/// Compare two symbol elements, rendering both sides on failure.
pub fn eq_check<T: PartialEq + std::fmt::Display>(lhs: &T, rhs: &T) -> CheckStatus {
    if lhs == rhs {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail {
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }
}

pub fn bool_check(ok: bool, detail: &str) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail {
            lhs: detail.to_string(),
            rhs: "expected to hold".to_string(),
        }
    }
}

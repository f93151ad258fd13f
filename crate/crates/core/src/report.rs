//! Machine-readable run reports shared by the library drivers and the CLI.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Reserved for conjecture checks: the outcome is evidence, not a theorem.
    Evidence,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub expected: String,
    pub actual: String,
    pub detail: String,
}

impl Check {
    pub fn exact(name: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Check {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        Check {
            name: name.into(),
            status: if expected == actual {
                Status::Pass
            } else {
                Status::Fail
            },
            expected,
            actual,
            detail: String::new(),
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Check {
        Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            expected: "true".into(),
            actual: ok.to_string(),
            detail: String::new(),
        }
    }

    pub fn evidence(
        name: impl Into<String>,
        expected: impl ToString,
        actual: impl ToString,
        ok: bool,
    ) -> Check {
        Check {
            name: name.into(),
            status: if ok { Status::Evidence } else { Status::Fail },
            expected: expected.to_string(),
            actual: actual.to_string(),
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = detail.into();
        self
    }
}

/// A deterministic run report: fields serialize in declaration order and
/// `params` is an ordered map, so identical runs emit identical bytes.
/// `elapsed_ms` stays 0 unless timings are explicitly requested.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Report {
        Report {
            command: command.into(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            elapsed_ms: 0,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Report {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// No failed checks (evidence counts as ok).
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("== {} ==\n", self.command));
        for (k, v) in &self.params {
            out.push_str(&format!("   {k} = {v}\n"));
        }
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Evidence => "EVIDENCE",
            };
            out.push_str(&format!("[{tag:8}] {}", c.name));
            if !c.expected.is_empty() {
                out.push_str(&format!(": expected {}, got {}", c.expected, c.actual));
            }
            if !c.detail.is_empty() {
                out.push_str(&format!(" ({})", c.detail));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "result: {}\n",
            if self.ok() {
                "all checks pass"
            } else {
                "FAILURES PRESENT"
            }
        ));
        out
    }
}

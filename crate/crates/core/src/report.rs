//! Check reports: status, witnesses, assumptions and timing.

use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// A concrete counterexample or failure note.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Where the failure was found, e.g. `I={1,3} J={2,3}`.
    pub at: String,
    /// Generator, cell or quantity that differs.
    pub item: String,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub assumptions: Vec<String>,
    pub timing: Timing,
    /// Counts and other check-specific facts.
    #[serde(default)]
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Accumulates witnesses and details while a check runs.
pub struct ReportBuilder {
    check: String,
    start: Instant,
    witnesses: Vec<Witness>,
    assumptions: Vec<String>,
    details: serde_json::Map<String, serde_json::Value>,
    max_witnesses: usize,
    failures: usize,
}

impl ReportBuilder {
    pub fn new(check: &str) -> Self {
        ReportBuilder {
            check: check.to_string(),
            start: Instant::now(),
            witnesses: Vec::new(),
            assumptions: Vec::new(),
            details: serde_json::Map::new(),
            max_witnesses: 50,
            failures: 0,
        }
    }

    pub fn fail(&mut self, at: impl Into<String>, item: impl Into<String>, expected: impl Into<String>, got: impl Into<String>) {
        self.failures += 1;
        if self.witnesses.len() < self.max_witnesses {
            self.witnesses.push(Witness {
                at: at.into(),
                item: item.into(),
                expected: expected.into(),
                got: got.into(),
            });
        }
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn assume(&mut self, a: impl IntoIterator<Item = String>) {
        for s in a {
            if !self.assumptions.contains(&s) {
                self.assumptions.push(s);
            }
        }
    }

    pub fn detail(&mut self, key: &str, v: impl Into<serde_json::Value>) {
        self.details.insert(key.to_string(), v.into());
    }

    pub fn absorb(&mut self, prefix: &str, r: &Report) {
        for w in &r.witnesses {
            self.fail(format!("{prefix}: {}", w.at), w.item.clone(), w.expected.clone(), w.got.clone());
        }
        if !r.passed() && r.witnesses.is_empty() {
            self.fail(prefix, r.check.clone(), "pass", "fail");
        }
        self.assume(r.assumptions.iter().cloned());
    }

    pub fn finish(mut self) -> Report {
        self.assumptions.sort();
        self.detail("failures", self.failures);
        Report {
            check: self.check,
            status: if self.failures == 0 { Status::Pass } else { Status::Fail },
            witnesses: self.witnesses,
            assumptions: self.assumptions,
            timing: Timing {
                elapsed_ms: self.start.elapsed().as_millis(),
            },
            details: self.details,
        }
    }
}

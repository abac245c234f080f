use std::fmt;

use crate::model::{ReducedState, SphereParams};
use crate::Error;

/// Outcome of one certification.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// The decisive value: the largest defect for upper-bound checks, the
    /// order statistic compared with the threshold for "generically nonzero" checks.
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    /// State at which `worst` was attained (or the smallest sampled value, for
    /// lower-bound checks).
    pub witness: Option<ReducedState>,
    pub detail: String,
}

impl CheckResult {
    /// A failed entry standing in for a check that could not be evaluated.
    pub fn error(name: &str, seed: u64, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            worst: f64::NAN,
            tolerance: f64::NAN,
            samples: 0,
            seed,
            witness: None,
            detail: err.to_string(),
        }
    }

    /// One `key=value` record. Failing entries carry their witness state.
    pub fn record(&self) -> String {
        let mut line = format!(
            "check={} status={} worst={:e} tol={:e} seed={}",
            self.name,
            if self.passed { "pass" } else { "fail" },
            self.worst,
            self.tolerance,
            self.seed
        );
        if !self.passed {
            if let Some(w) = &self.witness {
                let z = w.to_vec6();
                let parts: Vec<String> = z.iter().map(|v| format!("{v:e}")).collect();
                line.push_str(&format!(" witness={}", parts.join(",")));
            }
        }
        line
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.record())?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub params: SphereParams,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn new(params: SphereParams, seed: u64) -> Self {
        Self {
            params,
            seed,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = CheckResult>) {
        self.checks.extend(cs);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The report as line-oriented text, one record per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.record());
            out.push('\n');
        }
        out
    }
}

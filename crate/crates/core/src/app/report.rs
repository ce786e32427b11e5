//! Structured command output.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub quantity: String,
    pub method: String,
    pub value: f64,
    pub error_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The checked gap or statistic, when there is one.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub results: Vec<Quantity>,
    pub checks: Vec<Check>,
    pub status: Status,
    pub error: Option<String>,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub timestamp: u64,
}

/// SHA-256 of the key-sorted compact JSON text of `inputs`.
pub fn digest(inputs: &Value) -> String {
    let hash = Sha256::digest(inputs.to_string().as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Report {
    pub fn new(command: &str, inputs: &Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            inputs_digest: digest(inputs),
            seed,
            results: Vec::new(),
            checks: Vec::new(),
            status: Status::Pass,
            error: None,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    /// A report for input that could not be read or parsed.
    pub fn input_error(command: &str, message: &str) -> Self {
        let mut r = Self::new(command, &serde_json::json!({"command": command}), None);
        r.status = Status::Error;
        r.error = Some(message.to_string());
        r
    }

    pub fn push(&mut self, quantity: impl Into<String>, method: &str, value: f64, error_bound: Option<f64>) {
        self.results.push(Quantity {
            quantity: quantity.into(),
            method: method.to_string(),
            value,
            error_bound,
        });
    }

    /// Records `gap ≤ tolerance` and returns whether it held.
    pub fn check(&mut self, name: impl Into<String>, gap: f64, tolerance: f64) -> bool {
        let passed = gap <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            passed,
            value: Some(gap),
            tolerance: Some(tolerance),
        });
        self.refresh();
        passed
    }

    pub fn check_flag(&mut self, name: impl Into<String>, passed: bool) -> bool {
        self.checks.push(Check {
            name: name.into(),
            passed,
            value: None,
            tolerance: None,
        });
        self.refresh();
        passed
    }

    pub fn fail_with(&mut self, error: &Error) {
        self.status = Status::Error;
        self.error = Some(error.to_string());
    }

    fn refresh(&mut self) {
        if self.status != Status::Error {
            self.status = if self.checks.iter().all(|c| c.passed) {
                Status::Pass
            } else {
                Status::Fail
            };
        }
    }

    /// 0 when every check passed, 1 when a check failed, 2 on input errors.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Csv => self.to_csv(),
            Format::Table => self.to_table(),
        }
    }

    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        w.write_record(["kind", "name", "method", "value", "error_bound", "passed", "tolerance"])
            .expect("in-memory write");
        for q in &self.results {
            w.write_record([
                "result",
                &q.quantity,
                &q.method,
                &format!("{:e}", q.value),
                &opt(q.error_bound),
                "",
                "",
            ])
            .expect("in-memory write");
        }
        for c in &self.checks {
            w.write_record([
                "check",
                &c.name,
                "",
                &opt(c.value),
                "",
                if c.passed { "true" } else { "false" },
                &opt(c.tolerance),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}  [{}]", self.command, self.inputs_digest);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed {seed}");
        }
        let width = self
            .results
            .iter()
            .map(|q| q.quantity.len())
            .chain(self.checks.iter().map(|c| c.name.len()))
            .max()
            .unwrap_or(0);
        for q in &self.results {
            let bound = q.error_bound.map(|b| format!("  ± {b:.2e}")).unwrap_or_default();
            let _ = writeln!(out, "  {:<width$}  {:>22.15e}  {}{}", q.quantity, q.value, q.method, bound);
        }
        for c in &self.checks {
            let detail = match (c.value, c.tolerance) {
                (Some(v), Some(t)) => format!("  {v:.3e} <= {t:.1e}"),
                _ => String::new(),
            };
            let _ = writeln!(out, "  {:<width$}  {}{}", c.name, if c.passed { "PASS" } else { "FAIL" }, detail);
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error: {e}");
        }
        let _ = writeln!(out, "status: {:?}", self.status);
        out
    }
}

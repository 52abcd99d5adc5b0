//! Versioned JSON report shared by all commands.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA: &str = "lexrsm-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ProvedAsTermination,
    NoLinlexrsm,
    CannotProveCompositional,
    BoundCertified,
    NoEci,
    Simulated,
    Verified,
    VerifyFailed,
    InvariantViolation,
    UsageError,
    InternalError,
    Generated,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::ProvedAsTermination
            | Verdict::BoundCertified
            | Verdict::Simulated
            | Verdict::Verified
            | Verdict::Generated => 0,
            Verdict::NoLinlexrsm => 1,
            Verdict::CannotProveCompositional => 2,
            Verdict::NoEci => 3,
            Verdict::VerifyFailed => 4,
            Verdict::InvariantViolation => 5,
            Verdict::UsageError => 64,
            Verdict::InternalError => 70,
        }
    }
}

/// Wall-clock milliseconds per phase.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub parse: f64,
    pub invariants: f64,
    pub constraint_gen: f64,
    pub lp: f64,
    pub verify: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantRow {
    pub location: String,
    pub assertion: String,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checks {
    pub symbolic: bool,
    /// `None` when sampling was disabled.
    pub pointwise: Option<PointwiseSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseSummary {
    pub configurations: usize,
    pub transitions_checked: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub mode: String,
    pub program_digest: Option<String>,
    pub verdict: Verdict,
    /// Table columns: whether a solution exists, its dimension, and time.
    pub solution: bool,
    pub dimension: Option<usize>,
    pub certificate: Option<Value>,
    pub compositional: Option<Value>,
    pub bound: Option<Value>,
    pub simulation: Option<Value>,
    pub checks: Option<Checks>,
    pub invariants: Vec<InvariantRow>,
    pub timings_ms: Timings,
    pub seeds: Vec<u64>,
    pub diagnostics: Vec<String>,
    pub extra: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str, mode: &str) -> Report {
        Report {
            schema: REPORT_SCHEMA,
            command: command.to_string(),
            mode: mode.to_string(),
            program_digest: None,
            verdict: Verdict::InternalError,
            solution: false,
            dimension: None,
            certificate: None,
            compositional: None,
            bound: None,
            simulation: None,
            checks: None,
            invariants: Vec::new(),
            timings_ms: Timings::default(),
            seeds: Vec::new(),
            diagnostics: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The report with timings zeroed, for byte-stable comparisons.
    pub fn without_timings(&self) -> Report {
        Report { timings_ms: Timings::default(), ..self.clone() }
    }
}

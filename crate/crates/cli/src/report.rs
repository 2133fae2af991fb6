//! The JSON report written by every command.

use commonfix::hypothesis::{HypothesisReport, OrbitCheck, OrbitResult, Verdict};
use commonfix::solver::{SolveError, SolveReport};
use commonfix::Point;
use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    HypothesisFailed,
    SolveFailed,
    InputError,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::HypothesisFailed => 1,
            Status::SolveFailed => 2,
            Status::InputError => 3,
            Status::Inconclusive => 4,
        }
    }

    pub fn from_verdict(v: Verdict) -> Status {
        match v {
            Verdict::Pass => Status::Ok,
            Verdict::Fail => Status::HypothesisFailed,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: String,
    pub scenario_name: Option<String>,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub seed: Option<u64>,
    pub error: Option<String>,
    pub hypotheses: Option<HypothesisReport>,
    pub solve: Option<SolveSection>,
    pub certify: Option<CertifySection>,
    pub scan: Option<ScanSection>,
}

impl Report {
    pub fn new(command: &str, scenario_name: Option<String>, status: Status) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            scenario_name,
            status,
            exit_code: status.exit_code(),
            generated_at: None,
            seed: None,
            error: None,
            hypotheses: None,
            solve: None,
            certify: None,
            scan: None,
        }
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
        self.exit_code = status.exit_code();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveFailure {
    pub kind: &'static str,
    pub message: String,
}

impl SolveFailure {
    pub fn from_error(e: &SolveError) -> Self {
        let kind = match e {
            SolveError::HypothesisFailed { .. } => "hypothesis_failed",
            SolveError::Inconclusive { .. } => "inconclusive",
            SolveError::NonConvergence { .. } => "non_convergence",
            SolveError::SelfMapping { .. } => "self_mapping",
            SolveError::Eval { .. } => "evaluation",
            SolveError::CertificationFailed { .. } => "certification_failed",
            SolveError::UniquenessViolated { .. } => "uniqueness_violated",
            SolveError::Input(_) => "input",
        };
        SolveFailure {
            kind,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSection {
    /// Which construction ran: `pair`, `reduction` or `chain`.
    pub method: &'static str,
    pub forced: bool,
    pub result: Option<SolveReport>,
    pub failure: Option<SolveFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub map: String,
    pub residual: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifySection {
    pub point: Point,
    pub tol_cert: f64,
    pub residuals: Vec<Residual>,
    pub orbit: OrbitCheck,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScannedCandidate {
    pub point: Point,
    pub residual: f64,
    pub orbit: OrbitResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSection {
    pub map: String,
    pub tol_cert: f64,
    pub candidates: Vec<ScannedCandidate>,
}

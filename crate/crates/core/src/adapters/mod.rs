//! Graded-language adapters: harness generation, static heuristics and the
//! harness output protocol.

pub mod cpp;
pub mod heuristic;
pub mod protocol;
pub mod python;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::question::{GradedLanguage, Question, TestCase};
use crate::sandbox::SandboxRequest;

pub use cpp::{generate_cpp_harness, generate_cpp_probe_source, ProbeSpec};
pub use heuristic::evaluate_heuristic;
pub use protocol::{parse_protocol, ProtocolError};
pub use python::generate_python_harness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawStatus {
    Pass,
    Fail,
    Error,
    NotRun,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawOutcome {
    pub test_id: String,
    pub status: RawStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub got: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl RawOutcome {
    pub fn pass(test_id: &str) -> Self {
        RawOutcome {
            test_id: test_id.to_string(),
            status: RawStatus::Pass,
            got: None,
            detail: None,
        }
    }

    pub fn not_run(test_id: &str) -> Self {
        RawOutcome {
            test_id: test_id.to_string(),
            status: RawStatus::NotRun,
            got: None,
            detail: None,
        }
    }
}

/// Sandbox requests to run in order, and the tests the final run reports on.
#[derive(Debug, Clone)]
pub struct HarnessPlan {
    pub requests: Vec<SandboxRequest>,
    pub protocol_tests: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdapterError {
    #[error("harness for {expected:?} requested for a {got:?} question")]
    WrongLanguage {
        expected: GradedLanguage,
        got: GradedLanguage,
    },
    #[error("test `{test}`: probe `{probe}` is not supported for {language:?}")]
    UnsupportedProbe {
        test: String,
        probe: &'static str,
        language: GradedLanguage,
    },
    #[error("test `{test}`: `{name}` is not a valid identifier")]
    InvalidIdentifier { test: String, name: String },
    #[error("test `{test}`: unusable type or value `{ty}`")]
    InvalidType { test: String, ty: String },
}

/// Harness plan for `tests` in the question's language.
pub fn generate_harness(q: &Question, code: &str, tests: &[&TestCase]) -> Result<HarnessPlan, AdapterError> {
    match q.language {
        GradedLanguage::Python3 => generate_python_harness(q, code, tests),
        GradedLanguage::Cpp14 => generate_cpp_harness(q, code, tests),
    }
}

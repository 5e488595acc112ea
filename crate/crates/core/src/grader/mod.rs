//! Precheck and check orchestration: syntax gate, harness run, heuristics,
//! stop-on-error, marks and penalties.

mod report;

use std::collections::HashMap;

use thiserror::Error;

use crate::adapters::{evaluate_heuristic, generate_harness, parse_protocol, AdapterError, RawOutcome, RawStatus};
use crate::question::{GradedLanguage, Question, TestCase, TestPayload};
use crate::sandbox::{Sandbox, SandboxResult, Verdict, TRUNCATION_MARKER};

pub use report::{
    aggregate, apply_penalty, best_final_mark, hidden_literals, redact_report, Aggregate, Audience, GradeReport, Mode,
    TestResult, TestStatus, REDACTED,
};

/// Failures that are not the student's fault. They must never be scored.
#[derive(Debug, Error, PartialEq)]
pub enum GradeError {
    #[error("attempt numbers start at 1")]
    InvalidAttempt,
    #[error("question `{0}` has no model answer")]
    MissingModelAnswer(String),
    #[error("no check reports in history")]
    EmptyHistory,
    #[error("harness generation failed: {0}")]
    Adapter(#[from] AdapterError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Result of running the model answer through a question's tests.
#[derive(Debug, Clone)]
pub struct Validation {
    pub report: GradeReport,
    pub failing: Vec<String>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.failing.is_empty() && self.report.raw_marks == self.report.total_marks
    }
}

#[derive(Debug, Clone)]
pub struct Grader {
    sandbox: Sandbox,
}

/// What happened before per-test outcomes are known.
enum Execution {
    /// The student's code does not parse or compile on its own.
    GateFailed { diagnostics: String },
    Ran {
        outcomes: HashMap<String, RawOutcome>,
        /// Message attached to the first test that never reported.
        abort: Option<String>,
    },
}

impl Grader {
    pub fn new(sandbox: Sandbox) -> Self {
        Grader { sandbox }
    }

    pub fn sandbox(&self) -> &Sandbox {
        &self.sandbox
    }

    pub fn run_check(&self, q: &Question, code: &str, attempt_number: u32) -> Result<GradeReport, GradeError> {
        if attempt_number == 0 {
            return Err(GradeError::InvalidAttempt);
        }
        let penalty = q.penalty_regime.penalty_for(attempt_number);
        self.grade(q, code, Mode::Check, attempt_number, penalty, |_| true)
    }

    /// Syntax gate plus precheck-flagged tests, free of charge.
    pub fn run_precheck(&self, q: &Question, code: &str) -> Result<GradeReport, GradeError> {
        self.grade(q, code, Mode::Precheck, 0, 0, |t| t.flags.precheck)
    }

    pub fn validate_model_answer(&self, q: &Question) -> Result<Validation, GradeError> {
        let code = q
            .model_answer
            .as_deref()
            .ok_or_else(|| GradeError::MissingModelAnswer(q.id.clone()))?;
        let report = self.grade(q, code, Mode::AuthorValidate, 1, 0, |_| true)?;
        let failing = report
            .results
            .iter()
            .filter(|r| r.status != RawStatus::Pass)
            .map(|r| r.test_id.clone())
            .collect();
        Ok(Validation { report, failing })
    }

    fn grade(
        &self,
        q: &Question,
        code: &str,
        mode: Mode,
        attempt_number: u32,
        penalty_pct: u8,
        select: impl Fn(&TestCase) -> bool,
    ) -> Result<GradeReport, GradeError> {
        let mut tests: Vec<&TestCase> = q.tests.iter().filter(|t| select(t)).collect();
        tests.sort_by_key(|t| t.display_order);

        let mut wall_time = 0.0;
        let execution = self.execute(q, code, &tests, &mut wall_time)?;
        let total = q.total_marks();

        let (outcomes, abort, diagnostics) = match execution {
            Execution::GateFailed { diagnostics } => {
                let outcomes = tests.iter().map(|t| RawOutcome::not_run(&t.id)).collect();
                return Ok(build_report(
                    q,
                    &tests,
                    outcomes,
                    mode,
                    attempt_number,
                    penalty_pct,
                    diagnostics,
                    wall_time,
                    total,
                ));
            }
            Execution::Ran { outcomes, abort } => (outcomes, abort, String::new()),
        };

        // The first protocol test that never reported is where the run stopped.
        let mut abort = abort;
        let merged: Vec<RawOutcome> = tests
            .iter()
            .map(|t| match &t.payload {
                TestPayload::Heuristic(h) => evaluate_heuristic(&t.id, code, h),
                _ => {
                    let mut o = outcomes
                        .get(&t.id)
                        .cloned()
                        .unwrap_or_else(|| RawOutcome::not_run(&t.id));
                    if o.status == RawStatus::NotRun {
                        if let Some(message) = abort.take() {
                            o.status = RawStatus::Error;
                            o.detail = Some(message);
                        }
                    }
                    o
                }
            })
            .collect();
        Ok(build_report(
            q,
            &tests,
            merged,
            mode,
            attempt_number,
            penalty_pct,
            diagnostics,
            wall_time,
            total,
        ))
    }

    fn execute(
        &self,
        q: &Question,
        code: &str,
        tests: &[&TestCase],
        wall_time: &mut f64,
    ) -> Result<Execution, GradeError> {
        let plan = generate_harness(q, code, tests)?;
        let has_protocol = !plan.protocol_tests.is_empty();

        let mut requests = plan.requests;
        match q.language {
            GradedLanguage::Python3 => {
                let gate = self.sandbox.syntax_check(q.language, code, &q.limits);
                *wall_time += gate.wall_time;
                if let Some(failed) = gate_failure(&gate)? {
                    return Ok(failed);
                }
                if !has_protocol {
                    return Ok(Execution::Ran {
                        outcomes: HashMap::new(),
                        abort: None,
                    });
                }
            }
            GradedLanguage::Cpp14 => {
                if !has_protocol {
                    requests.truncate(1);
                }
            }
        }

        let results = self.sandbox.execute_plan(&requests);
        *wall_time += results.iter().map(|r| r.wall_time).sum::<f64>();
        let last = results
            .last()
            .ok_or_else(|| GradeError::Internal("sandbox returned no results".into()))?;

        if q.language == GradedLanguage::Cpp14 {
            if let Some(failed) = gate_failure(&results[0])? {
                return Ok(failed);
            }
            if !has_protocol {
                return Ok(Execution::Ran {
                    outcomes: HashMap::new(),
                    abort: None,
                });
            }
            if let Some(compile) = results.get(1) {
                if !compile.is_ok() {
                    return Err(GradeError::Internal(format!(
                        "test harness failed to build ({:?}):\n{}",
                        compile.verdict, compile.stderr
                    )));
                }
            }
            if results.len() < requests.len() {
                return Err(GradeError::Internal("sandbox stopped before the test run".into()));
            }
        }

        if last.verdict == Verdict::InternalError {
            return Err(GradeError::Internal(last.stderr.clone()));
        }
        let stdout = protocol_text(last);
        let parsed = parse_protocol(&stdout, &plan.protocol_tests)
            .map_err(|e| GradeError::Internal(format!("harness protocol: {e}")))?;
        let complete = parsed.iter().all(|o| o.status != RawStatus::NotRun);
        let abort = (!complete).then(|| abort_message(last));
        Ok(Execution::Ran {
            outcomes: parsed.into_iter().map(|o| (o.test_id.clone(), o)).collect(),
            abort,
        })
    }
}

/// `Some` when the student's code failed the syntax gate; an error when the
/// gate itself could not run.
fn gate_failure(gate: &SandboxResult) -> Result<Option<Execution>, GradeError> {
    match gate.verdict {
        Verdict::Ok => Ok(None),
        Verdict::CompileError => Ok(Some(Execution::GateFailed {
            diagnostics: gate.stderr.clone(),
        })),
        other => Err(GradeError::Internal(format!(
            "syntax check ended with {other:?}: {}",
            gate.stderr
        ))),
    }
}

/// Harness stdout with a truncated tail removed.
fn protocol_text(result: &SandboxResult) -> String {
    match result.stdout.strip_suffix(TRUNCATION_MARKER) {
        Some(kept) => match kept.rfind('\n') {
            Some(i) => kept[..=i].to_string(),
            None => String::new(),
        },
        None => result.stdout.clone(),
    }
}

fn abort_message(result: &SandboxResult) -> String {
    let reason = match result.verdict {
        Verdict::Timeout => "time limit exceeded".to_string(),
        Verdict::MemoryExceeded => "memory limit exceeded".to_string(),
        Verdict::OutputTruncated => "output limit exceeded".to_string(),
        Verdict::NonzeroExit => match result.exit_code {
            Some(code) => format!("runtime error (exit status {code})"),
            None => "runtime error (terminated by a signal)".to_string(),
        },
        _ => "the program stopped before this test reported".to_string(),
    };
    let stderr = result.stderr.trim_end();
    if stderr.is_empty() {
        reason
    } else {
        format!("{reason}\n{stderr}")
    }
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    q: &Question,
    tests: &[&TestCase],
    outcomes: Vec<RawOutcome>,
    mode: Mode,
    attempt_number: u32,
    penalty_pct: u8,
    toolchain_diagnostics: String,
    wall_time: f64,
    total_marks: f64,
) -> GradeReport {
    let statuses: Vec<RawStatus> = outcomes.iter().map(|o| o.status).collect();
    let marks: Vec<f64> = tests.iter().map(|t| t.marks).collect();
    let agg = aggregate(&statuses, &marks, total_marks, penalty_pct);
    let results = tests
        .iter()
        .zip(outcomes)
        .zip(agg.statuses.iter().zip(&agg.awarded))
        .map(|((t, o), (&status, &awarded))| {
            let shown_got = match (status, &t.payload) {
                (RawStatus::Fail, TestPayload::Heuristic(_)) => Some("False".to_string()),
                (RawStatus::Fail, _) => o.got.clone(),
                _ => None,
            };
            let message = if status == o.status {
                o.detail.unwrap_or_default()
            } else {
                String::new()
            };
            TestResult {
                test_id: t.id.clone(),
                kind: t.kind(),
                hidden: t.flags.hidden,
                status,
                marks_awarded: awarded,
                marks_available: t.marks,
                shown_input: t.display_input(),
                shown_expected: t.display_expected(),
                shown_got,
                message,
            }
        })
        .collect();
    GradeReport {
        question_id: q.id.clone(),
        attempt_number,
        mode,
        results,
        raw_marks: agg.raw_marks,
        total_marks,
        penalty_pct,
        final_fraction: agg.final_fraction,
        toolchain_diagnostics,
        wall_time_s: Some(wall_time),
    }
}

//! Grade reports, mark aggregation, penalties and redaction. Everything here
//! is pure.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GradeError;
use crate::adapters::RawStatus;
use crate::question::{PenaltyRegime, Question, TestKind};

/// Placeholder for anything a student may not see.
pub const REDACTED: &str = "«hidden»";

pub type TestStatus = RawStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Precheck,
    Check,
    AuthorValidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Audience {
    Student,
    Teacher,
}

impl FromStr for Audience {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "student" => Ok(Audience::Student),
            "teacher" => Ok(Audience::Teacher),
            other => Err(format!("unknown audience `{other}` (expected student or teacher)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_id: String,
    pub kind: TestKind,
    pub hidden: bool,
    pub status: TestStatus,
    pub marks_awarded: f64,
    pub marks_available: f64,
    pub shown_input: String,
    pub shown_expected: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shown_got: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeReport {
    pub question_id: String,
    pub attempt_number: u32,
    pub mode: Mode,
    pub results: Vec<TestResult>,
    pub raw_marks: f64,
    pub total_marks: f64,
    pub penalty_pct: u8,
    pub final_fraction: f64,
    pub toolchain_diagnostics: String,
    /// Total sandbox wall time in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl GradeReport {
    /// Drop fields that vary between otherwise identical runs.
    pub fn strip_timing(&mut self) {
        self.wall_time_s = None;
    }

    pub fn final_mark(&self) -> f64 {
        self.final_fraction * self.total_marks
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Penalised fraction for a check attempt.
pub fn apply_penalty(raw_fraction: f64, attempt_number: u32, regime: &PenaltyRegime) -> f64 {
    final_fraction(raw_fraction, regime.penalty_for(attempt_number))
}

fn final_fraction(raw_fraction: f64, penalty_pct: u8) -> f64 {
    (raw_fraction * (1.0 - f64::from(penalty_pct) / 100.0)).max(0.0)
}

/// Outcome of combining per-test statuses into marks.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub statuses: Vec<TestStatus>,
    pub awarded: Vec<f64>,
    pub raw_marks: f64,
    pub final_fraction: f64,
}

/// Apply stop-on-error and sum marks. `statuses` and `marks` are in display
/// order; everything after the first `error` becomes `not_run`.
pub fn aggregate(statuses: &[TestStatus], marks: &[f64], total_marks: f64, penalty_pct: u8) -> Aggregate {
    assert_eq!(statuses.len(), marks.len(), "one status per test");
    let mut out_statuses = Vec::with_capacity(statuses.len());
    let mut awarded = Vec::with_capacity(statuses.len());
    let mut stopped = false;
    for (&status, &m) in statuses.iter().zip(marks) {
        let status = if stopped { RawStatus::NotRun } else { status };
        if status == RawStatus::Error {
            stopped = true;
        }
        awarded.push(if status == RawStatus::Pass { m } else { 0.0 });
        out_statuses.push(status);
    }
    let raw_marks: f64 = awarded.iter().sum();
    let raw_fraction = if total_marks > 0.0 {
        raw_marks / total_marks
    } else {
        0.0
    };
    Aggregate {
        statuses: out_statuses,
        awarded,
        raw_marks,
        final_fraction: final_fraction(raw_fraction, penalty_pct),
    }
}

/// Highest penalised mark among the check reports in `history`. Prechecks and
/// author validations are ignored.
pub fn best_final_mark(history: &[GradeReport]) -> Result<f64, GradeError> {
    history
        .iter()
        .filter(|r| r.mode == Mode::Check)
        .map(GradeReport::final_mark)
        .fold(None, |best: Option<f64>, m| Some(best.map_or(m, |b| b.max(m))))
        .ok_or(GradeError::EmptyHistory)
}

/// Literal texts of `q`'s hidden tests, longest first.
pub fn hidden_literals(q: &Question) -> Vec<String> {
    let mut secrets: Vec<String> = q
        .tests
        .iter()
        .filter(|t| t.flags.hidden)
        .flat_map(|t| t.secret_literals())
        .collect();
    secrets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    secrets.dedup();
    secrets
}

fn scrub(text: &str, secrets: &[String]) -> String {
    let mut out = text.to_string();
    for s in secrets {
        if out.contains(s.as_str()) {
            out = out.replace(s.as_str(), REDACTED);
        }
    }
    out
}

/// Teacher reports are returned unchanged. Student reports have hidden tests'
/// input, expected and got replaced by [`REDACTED`], and any hidden literal
/// that leaked into a message or the diagnostics scrubbed. Status and marks
/// are never touched.
pub fn redact_report(report: &GradeReport, q: &Question, audience: Audience) -> GradeReport {
    let mut out = report.clone();
    if audience == Audience::Teacher {
        return out;
    }
    let secrets = hidden_literals(q);
    for r in &mut out.results {
        if r.hidden {
            r.shown_input = REDACTED.to_string();
            r.shown_expected = REDACTED.to_string();
            r.shown_got = Some(REDACTED.to_string());
        }
        r.message = scrub(&r.message, &secrets);
    }
    out.toolchain_diagnostics = scrub(&out.toolchain_diagnostics, &secrets);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn regime() -> PenaltyRegime {
        PenaltyRegime::new(vec![0, 0, 10, 20]).unwrap()
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(apply_penalty(1.0, 2, &regime()), 1.0);
        assert!((apply_penalty(1.0, 3, &regime()) - 0.9).abs() < 1e-12);
        assert!((apply_penalty(0.6, 7, &regime()) - 0.48).abs() < 1e-12);
        assert_eq!(apply_penalty(0.0, 1, &regime()), 0.0);
        let full = PenaltyRegime::new(vec![100]).unwrap();
        assert_eq!(apply_penalty(0.7, 1, &full), 0.0);
    }

    #[test]
    fn stop_on_error_truncates() {
        use RawStatus::*;
        let a = aggregate(&[Pass, Pass, Error, Pass, Fail], &[0.5, 0.5, 0.5, 2.0, 1.0], 4.5, 0);
        assert_eq!(a.statuses, vec![Pass, Pass, Error, NotRun, NotRun]);
        assert_eq!(a.awarded, vec![0.5, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(a.raw_marks, 1.0);
    }

    fn report(mode: Mode, fraction: f64) -> GradeReport {
        GradeReport {
            question_id: "q".into(),
            attempt_number: 1,
            mode,
            results: vec![],
            raw_marks: 0.0,
            total_marks: 10.0,
            penalty_pct: 0,
            final_fraction: fraction,
            toolchain_diagnostics: String::new(),
            wall_time_s: None,
        }
    }

    #[test]
    fn best_mark_examples() {
        assert_eq!(
            best_final_mark(&[report(Mode::Check, 0.2), report(Mode::Check, 1.0)]).unwrap(),
            10.0
        );
        assert_eq!(best_final_mark(&[report(Mode::Check, 0.6)]).unwrap(), 6.0);
        assert_eq!(
            best_final_mark(&[report(Mode::Check, 0.9), report(Mode::Check, 0.8)]).unwrap(),
            9.0
        );
        assert_eq!(best_final_mark(&[]), Err(GradeError::EmptyHistory));
        assert_eq!(
            best_final_mark(&[report(Mode::Precheck, 1.0)]),
            Err(GradeError::EmptyHistory)
        );
    }

    #[test]
    fn scrub_replaces_longest_first() {
        let secrets = vec!["abc def".to_string(), "abc".to_string()];
        assert_eq!(scrub("x abc def abc", &secrets), "x «hidden» «hidden»");
    }

    fn status() -> impl Strategy<Value = RawStatus> {
        prop_oneof![
            Just(RawStatus::Pass),
            Just(RawStatus::Fail),
            Just(RawStatus::Error),
            Just(RawStatus::NotRun),
        ]
    }

    fn cases() -> impl Strategy<Value = (Vec<RawStatus>, Vec<f64>)> {
        (1usize..24).prop_flat_map(|n| {
            (
                proptest::collection::vec(status(), n),
                proptest::collection::vec((0u32..9).prop_map(|h| f64::from(h) * 0.5), n),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn marks_stay_in_bounds((statuses, marks) in cases(), p in 0u8..=100) {
            let total: f64 = marks.iter().sum::<f64>().max(0.5);
            let a = aggregate(&statuses, &marks, total, p);
            prop_assert!(a.raw_marks >= 0.0 && a.raw_marks <= total);
            prop_assert!(a.final_fraction >= 0.0 && a.final_fraction <= 1.0);
            prop_assert!(a.final_fraction <= a.raw_marks / total + 1e-12);
            prop_assert_eq!(a.raw_marks, a.awarded.iter().sum::<f64>());
            for ((s, w), m) in a.statuses.iter().zip(&a.awarded).zip(&marks) {
                prop_assert!(*w == 0.0 || w == m);
                if *s == RawStatus::Pass { prop_assert_eq!(w, m); } else { prop_assert_eq!(*w, 0.0); }
            }
        }

        #[test]
        fn nothing_after_an_error_runs((statuses, marks) in cases()) {
            let total: f64 = marks.iter().sum::<f64>().max(0.5);
            let a = aggregate(&statuses, &marks, total, 0);
            if let Some(k) = a.statuses.iter().position(|s| *s == RawStatus::Error) {
                prop_assert!(a.statuses[k + 1..].iter().all(|s| *s == RawStatus::NotRun));
                prop_assert!(a.awarded[k + 1..].iter().all(|w| *w == 0.0));
            }
            prop_assert!(a.statuses.iter().filter(|s| **s == RawStatus::Error).count() <= 1);
        }

        #[test]
        fn aggregation_is_deterministic((statuses, marks) in cases(), p in 0u8..=100) {
            let total: f64 = marks.iter().sum::<f64>().max(0.5);
            prop_assert_eq!(aggregate(&statuses, &marks, total, p), aggregate(&statuses, &marks, total, p));
        }

        #[test]
        fn penalty_never_rises_with_attempts(
            mut entries in proptest::collection::vec(0u8..=100, 1..8),
            raw in 0.0f64..=1.0,
            attempt in 1u32..20,
        ) {
            entries.sort_unstable();
            let regime = PenaltyRegime::new(entries).unwrap();
            let now = apply_penalty(raw, attempt, &regime);
            prop_assert!(apply_penalty(raw, attempt + 1, &regime) <= now);
            prop_assert!(now <= raw);
            prop_assert!(now >= 0.0);
        }

        #[test]
        fn prechecks_do_not_move_the_best_mark(
            checks in proptest::collection::vec(0.0f64..=1.0, 1..10),
            prechecks in proptest::collection::vec((0usize..10, 0.0f64..=1.0), 0..10),
        ) {
            let history: Vec<GradeReport> = checks.iter().map(|f| report(Mode::Check, *f)).collect();
            let baseline = best_final_mark(&history).unwrap();
            let mut mixed = history.clone();
            for (pos, f) in prechecks {
                let at = pos.min(mixed.len());
                mixed.insert(at, report(Mode::Precheck, f));
            }
            prop_assert_eq!(best_final_mark(&mixed).unwrap(), baseline);
        }
    }
}

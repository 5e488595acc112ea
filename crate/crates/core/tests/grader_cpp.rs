mod common;

use assess_core::adapters::RawStatus;
use assess_core::grader::GradeReport;
use common::{grader, question, submission};

fn check(q: &str, file: &str) -> GradeReport {
    grader().run_check(&question(q), &submission(q, file), 1).unwrap()
}

fn statuses(r: &GradeReport) -> Vec<RawStatus> {
    r.results.iter().map(|t| t.status).collect()
}

#[test]
fn correct_doubler_passes_everything() {
    let r = check("doubler", "model.cpp");
    assert!(r.results.iter().all(|t| t.status == RawStatus::Pass), "{}", r.to_json());
    assert_eq!(r.raw_marks, 7.0);
}

#[test]
fn returns_ten_earns_only_the_existence_probe() {
    use RawStatus::*;
    let r = check("doubler", "returns_ten.cpp");
    assert_eq!(statuses(&r), [Pass, Fail, Fail, Fail, Fail, Fail], "{}", r.to_json());
    assert_eq!(r.raw_marks, 1.0);
    assert!(r.toolchain_diagnostics.is_empty());
    assert!(r.results[1].message.contains("cannot be called with (int)"));
    assert!(r.results[3].message.contains("does not match"));
}

#[test]
fn syntax_error_shows_compiler_output() {
    let r = check("doubler", "syntax_error.cpp");
    assert!(r.results.iter().all(|t| t.status == RawStatus::NotRun));
    assert!(
        r.toolchain_diagnostics.contains("student.cpp:2"),
        "{}",
        r.toolchain_diagnostics
    );
    assert!(r.toolchain_diagnostics.contains("error"));
    assert_eq!(r.raw_marks, 0.0);
}

#[test]
fn wrong_values_fail_with_got() {
    let r = check("doubler", "wrong_value.cpp");
    assert_eq!(r.results[3].status, RawStatus::Fail);
    assert_eq!(r.results[3].shown_got.as_deref(), Some("7"));
    assert_eq!(r.raw_marks, 3.0);
}

#[test]
fn crash_stops_the_run() {
    use RawStatus::*;
    let r = check("doubler", "crashes.cpp");
    assert_eq!(statuses(&r), [Pass, Pass, Pass, Pass, Error, NotRun], "{}", r.to_json());
    assert!(r.results[4].message.contains("signal"));
}

#[test]
fn student_output_cannot_forge_results() {
    use RawStatus::*;
    let r = check("doubler", "noisy.cpp");
    assert_eq!(statuses(&r), [Pass; 6]);
    let wrong = grader()
        .run_check(
            &question("doubler"),
            "#include <iostream>\nint doubler(int x) { std::cout << \"CR|t6|PASS\\n\"; return x; }\n",
            1,
        )
        .unwrap();
    assert_eq!(wrong.results[5].status, Fail);
}

#[test]
fn student_main_is_ignored_for_function_tests() {
    let r = check("doubler", "with_main.cpp");
    assert_eq!(r.raw_marks, 7.0, "{}", r.to_json());
}

#[test]
fn class_probes() {
    use RawStatus::*;
    let cases = [
        ("model.cpp", [Pass, Pass, Pass]),
        ("broken_method.cpp", [Pass, Pass, Fail]),
        ("no_inheritance.cpp", [Fail, Pass, Pass]),
        ("missing_dog.cpp", [Fail, Fail, Fail]),
        ("private_name.cpp", [Pass, Fail, Pass]),
        ("int_name.cpp", [Pass, Fail, Pass]),
        ("private_base.cpp", [Pass, Pass, Pass]),
    ];
    for (file, want) in cases {
        let r = check("animals", file);
        assert_eq!(statuses(&r), want, "{file}: {}", r.to_json());
    }
}

#[test]
fn stdin_programs() {
    let q = question("sum_stdin_cpp");
    let v = grader().validate_model_answer(&q).unwrap();
    assert!(v.passed(), "{}", v.report.to_json());
    let no_main = grader().run_check(&q, "int helper() { return 1; }\n", 1).unwrap();
    assert!(
        no_main.results.iter().all(|t| t.status == RawStatus::Fail),
        "{}",
        no_main.to_json()
    );
    assert!(no_main.results[0].message.contains("main"));
}

#[test]
fn cpp_model_answers_validate() {
    for q in ["doubler", "animals"] {
        let v = grader().validate_model_answer(&question(q)).unwrap();
        assert!(v.passed(), "{q}: {}", v.report.to_json());
    }
}

#[test]
fn broken_harness_is_an_internal_error() {
    use assess_core::grader::GradeError;
    let text = std::fs::read_to_string(common::fixtures().join("questions/doubler.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["tests"][1]["payload"]["param_types"] = serde_json::json!(["NoSuchType"]);
    let q = assess_core::question::parse_question(&doc.to_string()).unwrap();
    let err = grader()
        .run_check(&q, &submission("doubler", "model.cpp"), 1)
        .unwrap_err();
    assert!(matches!(err, GradeError::Internal(_)), "{err:?}");
}

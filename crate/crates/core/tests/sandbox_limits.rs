mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use assess_core::question::{GradedLanguage, ResourceLimits};
use assess_core::sandbox::{Phase, Sandbox, SandboxConfig, SandboxRequest, Toolchain, Verdict, TRUNCATION_MARKER};
use common::sandbox;

fn limits() -> ResourceLimits {
    ResourceLimits {
        run_timeout: Duration::from_secs(2),
        ..ResourceLimits::default()
    }
}

fn python(code: &str, limits: ResourceLimits) -> SandboxRequest {
    SandboxRequest {
        language: GradedLanguage::Python3,
        files: BTreeMap::from([("main.py".to_string(), code.to_string())]),
        phase: Phase::Run,
        entry: "main.py".into(),
        limits,
    }
}

#[test]
fn hello() {
    let r = sandbox().execute(&python("print('hello')", limits()));
    assert_eq!(r.verdict, Verdict::Ok);
    assert_eq!(r.stdout, "hello\n");
    assert_eq!(r.exit_code, Some(0));
}

#[test]
fn nonzero_exit_keeps_stderr() {
    let r = sandbox().execute(&python("raise ValueError('boom')", limits()));
    assert_eq!(r.verdict, Verdict::NonzeroExit);
    assert!(r.stderr.contains("Traceback"));
    assert!(r.stderr.contains("ValueError: boom"));
}

#[test]
fn infinite_loop_times_out() {
    let start = Instant::now();
    let r = sandbox().execute(&python("while True:\n    pass\n", limits()));
    assert_eq!(r.verdict, Verdict::Timeout);
    assert!(start.elapsed() < Duration::from_secs(4), "{:?}", start.elapsed());
}

#[test]
fn sleeping_past_the_limit_times_out() {
    let short = ResourceLimits {
        run_timeout: Duration::from_millis(300),
        ..ResourceLimits::default()
    };
    let r = sandbox().execute(&python("import time\ntime.sleep(3)\nprint('late')", short));
    assert_eq!(r.verdict, Verdict::Timeout);
    assert!(!r.stdout.contains("late"));
}

#[test]
fn memory_cap_is_enforced() {
    let small = ResourceLimits {
        memory_cap: 64 * 1024 * 1024,
        ..limits()
    };
    let r = sandbox().execute(&python("x = bytearray(512 * 1024 * 1024)\nprint(len(x))", small));
    assert_eq!(r.verdict, Verdict::MemoryExceeded, "{r:?}");
}

#[test]
fn cpp_memory_cap_is_enforced() {
    let small = ResourceLimits {
        memory_cap: 64 * 1024 * 1024,
        ..limits()
    };
    let code = "#include <vector>\n#include <cstdio>\nint main() { std::vector<char> v(1u << 30, 1); std::printf(\"%d\", v[7]); }\n";
    let files = BTreeMap::from([("m.cpp".to_string(), code.to_string())]);
    let compile = SandboxRequest {
        language: GradedLanguage::Cpp14,
        files,
        phase: Phase::Compile,
        entry: "m.cpp".into(),
        limits: small,
    };
    let run = SandboxRequest {
        files: BTreeMap::new(),
        phase: Phase::Run,
        ..compile.clone()
    };
    let results = sandbox().execute_plan(&[compile, run]);
    assert_eq!(results.len(), 2, "{results:?}");
    assert_eq!(results[1].verdict, Verdict::MemoryExceeded, "{:?}", results[1]);
}

#[test]
fn output_cap_truncates() {
    let capped = ResourceLimits {
        output_cap: 4096,
        ..limits()
    };
    let r = sandbox().execute(&python("import sys\nsys.stdout.write('x' * 40960)", capped));
    assert_eq!(r.verdict, Verdict::OutputTruncated);
    assert!(r.stdout.len() <= 4096, "{}", r.stdout.len());
    assert!(r.stdout.ends_with(TRUNCATION_MARKER));
}

#[test]
fn endless_output_is_cut_off() {
    let capped = ResourceLimits {
        output_cap: 4096,
        ..limits()
    };
    let r = sandbox().execute(&python("while True:\n    print('spam')\n", capped));
    assert_eq!(r.verdict, Verdict::OutputTruncated);
    assert!(r.stdout.len() <= 4096);
}

#[test]
fn cpp_compile_error_has_diagnostics() {
    let r = sandbox().syntax_check(GradedLanguage::Cpp14, "int main() { return 0 }\n", &limits());
    assert_eq!(r.verdict, Verdict::CompileError);
    assert!(r.stderr.contains("student.cpp:1"), "{}", r.stderr);
}

#[test]
fn python_syntax_check_points_at_the_line() {
    let r = sandbox().syntax_check(
        GradedLanguage::Python3,
        "def f(x):\n    for a in x\n        pass\n",
        &limits(),
    );
    assert_eq!(r.verdict, Verdict::CompileError);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
}

#[test]
fn python_syntax_check_accepts_runtime_errors_and_empty_source() {
    let sb = sandbox();
    let unbound = "def f(words):\n    for w in words:\n        total += len(w)\n";
    assert_eq!(
        sb.syntax_check(GradedLanguage::Python3, unbound, &limits()).verdict,
        Verdict::Ok
    );
    assert_eq!(
        sb.syntax_check(GradedLanguage::Python3, "", &limits()).verdict,
        Verdict::Ok
    );
}

#[test]
fn syntax_check_never_executes() {
    let dir = tempfile::tempdir().unwrap();
    let sentinel = dir.path().join("sentinel");
    let code = format!("open({:?}, 'w').write('ran')\n", sentinel.to_str().unwrap());
    let r = sandbox().syntax_check(GradedLanguage::Python3, &code, &limits());
    assert_eq!(r.verdict, Verdict::Ok);
    assert!(!sentinel.exists());
}

#[test]
fn concurrent_runs_use_distinct_workspaces() {
    let sb = sandbox();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let sb = sb.clone();
            std::thread::spawn(move || {
                sb.execute(&python(
                    "import os, time\nprint(os.getcwd())\ntime.sleep(0.2)",
                    limits(),
                ))
                .stdout
            })
        })
        .collect();
    let mut dirs: Vec<String> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(dirs.iter().all(|d| !d.trim().is_empty()));
    dirs.sort();
    dirs.dedup();
    assert_eq!(dirs.len(), 4);
}

#[test]
fn missing_toolchain_is_an_internal_error() {
    let sb = Sandbox::new(SandboxConfig {
        toolchain: Toolchain {
            python: PathBuf::from("/nonexistent/python3"),
            ..Toolchain::default()
        },
        ..SandboxConfig::default()
    });
    let r = sb.execute(&python("print(1)", limits()));
    assert_eq!(r.verdict, Verdict::InternalError);
    assert!(sb.toolchain().validate().is_err());
}

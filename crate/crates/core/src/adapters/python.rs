//! Python3 harness generation.
//!
//! The harness execs the submission into a fresh namespace and then runs each
//! test in order. Nothing is wrapped in `try`: an exception in student code
//! ends the run with the interpreter's own traceback on stderr, and tests that
//! never reported are treated as not run.
//!
//! Uncaught exceptions are printed by the standard traceback machinery,
//! starting at the first frame inside the submission.
//!
//! Protocol lines go to a private duplicate of the original stdout; fd 1 is
//! pointed at stderr, so anything the submission prints lands there.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{AdapterError, HarnessPlan};
use crate::question::{Compare, GradedLanguage, IntrospectionCheck, IoCall, Question, TestCase, TestPayload};
use crate::sandbox::{Phase, SandboxRequest};

pub const HARNESS_FILE: &str = "cr_harness.py";

const PRELUDE: &str = r#"# Generated grading harness.
import contextlib as _cr_contextlib
import inspect as _cr_inspect
import io as _cr_io
import os as _cr_os
import sys as _cr_sys
import traceback as _cr_traceback

_cr_sys.stdout.flush()
_cr_out = _cr_os.fdopen(_cr_os.dup(1), "w", encoding="utf-8")
_cr_os.dup2(2, 1)


def _cr_excepthook(kind, value, tb):
    # Report from the first frame in the submission; harness frames are noise.
    while tb is not None and tb.tb_frame.f_code.co_filename != "student.py":
        tb = tb.tb_next
    _cr_traceback.print_exception(kind, value, tb)


_cr_sys.excepthook = _cr_excepthook

def _cr_emit(test_id, status, detail=None):
    line = "CR|" + test_id + "|" + status
    if detail is not None:
        detail = str(detail)[:2000]
        line += "|" + detail.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")
    _cr_out.write(line + "\n")
    _cr_out.flush()


def _cr_lookup(test_id, name):
    if name in _cr_globals:
        return True, _cr_globals[name]
    _cr_emit(test_id, "FAIL", name + " is not defined")
    return False, None


def _cr_symbol(test_id, name):
    if name in _cr_globals:
        _cr_emit(test_id, "PASS")
    else:
        _cr_emit(test_id, "FAIL", name + " is not defined")


def _cr_arity(test_id, name, n):
    found, fn = _cr_lookup(test_id, name)
    if not found:
        return
    count = len(_cr_inspect.signature(fn).parameters)
    if count == n:
        _cr_emit(test_id, "PASS")
    else:
        _cr_emit(test_id, "FAIL", "got=" + str(count))


def _cr_return_type(test_id, name, expected):
    found, fn = _cr_lookup(test_id, name)
    if not found:
        return
    got = type(fn(*_CR_ARGS[test_id])).__name__
    if got == expected:
        _cr_emit(test_id, "PASS")
    else:
        _cr_emit(test_id, "FAIL", "got=" + got)


def _cr_matches(test_id, got, text):
    expected = _CR_EXPECTED[test_id]
    if test_id in _CR_TOLERANCE:
        if text is not None:
            try:
                got = float(text.strip())
            except ValueError:
                return False
        if isinstance(got, bool) or not isinstance(got, (int, float)):
            return False
        return abs(got - float(expected)) <= _CR_TOLERANCE[test_id]
    if text is not None:
        return text.rstrip() == expected.rstrip()
    return repr(got) == expected


def _cr_call(test_id, name):
    found, fn = _cr_lookup(test_id, name)
    if not found:
        return
    got = fn(*_CR_ARGS[test_id])
    if _cr_matches(test_id, got, None):
        _cr_emit(test_id, "PASS")
    else:
        _cr_emit(test_id, "FAIL", "got=" + repr(got))


def _cr_program(test_id):
    captured = _cr_io.StringIO()
    saved = _cr_sys.stdin
    _cr_sys.stdin = _cr_io.StringIO(_CR_STDIN[test_id])
    with _cr_contextlib.redirect_stdout(captured):
        try:
            exec(_CR_CODE, {"__name__": "__main__", "__builtins__": __builtins__})
        except SystemExit:
            pass
    _cr_sys.stdin = saved
    text = captured.getvalue()
    if _cr_matches(test_id, None, text):
        _cr_emit(test_id, "PASS")
    else:
        _cr_emit(test_id, "FAIL", "got=" + text)


with open("student.py", encoding="utf-8") as _cr_fh:
    _CR_CODE = compile(_cr_fh.read(), "student.py", "exec")
"#;

/// JSON string literals are valid Python string literals.
fn py_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn py_tuple(args: &[String]) -> String {
    if args.is_empty() {
        "()".to_string()
    } else {
        format!("({},)", args.join(", "))
    }
}

pub fn generate_python_harness(q: &Question, code: &str, tests: &[&TestCase]) -> Result<HarnessPlan, AdapterError> {
    if q.language != GradedLanguage::Python3 {
        return Err(AdapterError::WrongLanguage {
            expected: GradedLanguage::Python3,
            got: q.language,
        });
    }
    let source = python_harness_source(tests)?;
    let files = BTreeMap::from([
        (GradedLanguage::Python3.student_file().to_string(), code.to_string()),
        (HARNESS_FILE.to_string(), source),
    ]);
    Ok(HarnessPlan {
        requests: vec![SandboxRequest {
            language: GradedLanguage::Python3,
            files,
            phase: Phase::Run,
            entry: HARNESS_FILE.to_string(),
            limits: q.limits,
        }],
        protocol_tests: tests
            .iter()
            .filter(|t| !matches!(t.payload, TestPayload::Heuristic(_)))
            .map(|t| t.id.clone())
            .collect(),
    })
}

/// The harness program text for `tests` (heuristics are skipped).
pub fn python_harness_source(tests: &[&TestCase]) -> Result<String, AdapterError> {
    let mut args = Vec::new();
    let mut expected = Vec::new();
    let mut tolerance = Vec::new();
    let mut stdin = Vec::new();
    let mut body = String::new();
    let mut needs_module = false;

    for t in tests {
        let id = py_str(&t.id);
        match &t.payload {
            TestPayload::Heuristic(_) => continue,
            TestPayload::Introspection(check) => {
                needs_module = true;
                match check {
                    IntrospectionCheck::SymbolDefined { name } => {
                        writeln!(body, "_cr_symbol({id}, {})", py_str(name)).unwrap();
                    }
                    IntrospectionCheck::Arity { name, n } => {
                        writeln!(body, "_cr_arity({id}, {}, {n})", py_str(name)).unwrap();
                    }
                    IntrospectionCheck::ReturnType {
                        name,
                        sample_args,
                        expected_type,
                    } => {
                        args.push(format!("    {id}: {},", py_tuple(sample_args)));
                        writeln!(
                            body,
                            "_cr_return_type({id}, {}, {})",
                            py_str(name),
                            py_str(expected_type)
                        )
                        .unwrap();
                    }
                    other => {
                        return Err(AdapterError::UnsupportedProbe {
                            test: t.id.clone(),
                            probe: other.probe_name(),
                            language: GradedLanguage::Python3,
                        })
                    }
                }
            }
            TestPayload::Io(io) => {
                expected.push(format!("    {id}: {},", py_str(&io.expected)));
                if let Compare::NumericTolerance { tol } = io.compare {
                    tolerance.push(format!("    {id}: {tol:?},"));
                }
                match &io.call {
                    IoCall::Function {
                        function,
                        args: call_args,
                    } => {
                        needs_module = true;
                        args.push(format!("    {id}: {},", py_tuple(call_args)));
                        writeln!(body, "_cr_call({id}, {})", py_str(function)).unwrap();
                    }
                    IoCall::Stdin(text) => {
                        stdin.push(format!("    {id}: {},", py_str(text)));
                        writeln!(body, "_cr_program({id})").unwrap();
                    }
                }
            }
        }
    }

    let mut out = String::from(PRELUDE);
    for (name, entries) in [
        ("_CR_ARGS", &args),
        ("_CR_EXPECTED", &expected),
        ("_CR_TOLERANCE", &tolerance),
        ("_CR_STDIN", &stdin),
    ] {
        writeln!(out, "{name} = {{").unwrap();
        for e in entries {
            writeln!(out, "{e}").unwrap();
        }
        writeln!(out, "}}").unwrap();
    }
    out.push_str("_cr_globals = {\"__name__\": \"__student__\", \"__builtins__\": __builtins__}\n");
    if needs_module {
        out.push_str("exec(_CR_CODE, _cr_globals)\n");
    }
    out.push('\n');
    out.push_str(&body);
    out.push_str("_cr_out.close()\n");
    Ok(out)
}

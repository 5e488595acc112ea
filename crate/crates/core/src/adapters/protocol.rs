//! The line protocol a harness prints to report per-test outcomes:
//!
//! ```text
//! CR|<test_id>|PASS
//! CR|<test_id>|FAIL|got=<repr>
//! CR|<test_id>|ERROR|<message>
//! ```
//!
//! Other lines are ignored. A line that starts with `CR|` but does not parse is
//! a harness fault, unless it is an unterminated final line (the run was cut
//! short mid-write).

use std::collections::HashMap;

use thiserror::Error;

use super::{RawOutcome, RawStatus};

pub const PREFIX: &str = "CR|";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("duplicate protocol line for test `{0}`")]
    Duplicate(String),
    #[error("protocol line for unexpected test `{0}`")]
    UnknownTest(String),
    #[error("malformed protocol line {0:?}")]
    Malformed(String),
}

/// Escape a detail so it fits on one protocol line.
pub fn escape_detail(text: &str) -> String {
    text.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

pub fn format_line(test_id: &str, status: RawStatus, detail: Option<&str>) -> String {
    let tag = match status {
        RawStatus::Pass => "PASS",
        RawStatus::Fail => "FAIL",
        RawStatus::Error => "ERROR",
        RawStatus::NotRun => panic!("not_run is never reported by a harness"),
    };
    match detail {
        Some(d) if status != RawStatus::Pass => format!("{PREFIX}{test_id}|{tag}|{}", escape_detail(d)),
        _ => format!("{PREFIX}{test_id}|{tag}"),
    }
}

fn parse_line(line: &str) -> Option<RawOutcome> {
    let rest = line.strip_prefix(PREFIX)?;
    let mut parts = rest.splitn(3, '|');
    let id = parts.next().filter(|id| !id.is_empty())?;
    let status = match parts.next()? {
        "PASS" => RawStatus::Pass,
        "FAIL" => RawStatus::Fail,
        "ERROR" => RawStatus::Error,
        _ => return None,
    };
    let detail = parts.next();
    let (got, detail) = match (status, detail) {
        (RawStatus::Pass, _) => (None, None),
        (RawStatus::Fail, Some(d)) => match d.strip_prefix("got=") {
            Some(g) => (Some(g.to_string()), None),
            None => (None, Some(d.to_string())),
        },
        (_, d) => (None, d.map(str::to_string)),
    };
    Some(RawOutcome {
        test_id: id.to_string(),
        status,
        got,
        detail,
    })
}

/// Map harness stdout onto `expected_ids`, in that order. Ids without a line
/// become `not_run`.
pub fn parse_protocol(stdout: &str, expected_ids: &[String]) -> Result<Vec<RawOutcome>, ProtocolError> {
    let mut found: HashMap<String, RawOutcome> = HashMap::new();
    let terminated = stdout.ends_with('\n');
    let lines: Vec<&str> = stdout.lines().collect();
    for (i, raw) in lines.iter().enumerate() {
        let line = raw.trim_end_matches('\r');
        if !line.starts_with(PREFIX) {
            continue;
        }
        let is_partial_tail = i + 1 == lines.len() && !terminated;
        let Some(outcome) = parse_line(line) else {
            if is_partial_tail {
                continue;
            }
            return Err(ProtocolError::Malformed(line.to_string()));
        };
        if !expected_ids.contains(&outcome.test_id) {
            if is_partial_tail {
                continue;
            }
            return Err(ProtocolError::UnknownTest(outcome.test_id));
        }
        if found.contains_key(&outcome.test_id) {
            return Err(ProtocolError::Duplicate(outcome.test_id));
        }
        found.insert(outcome.test_id.clone(), outcome);
    }
    Ok(expected_ids
        .iter()
        .map(|id| found.remove(id).unwrap_or_else(|| RawOutcome::not_run(id)))
        .collect())
}

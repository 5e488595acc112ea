//! Static source checks: plain substring matching plus a name-count test for
//! recursion. No parsing; comments and string literals count like code.

use super::{RawOutcome, RawStatus};
use crate::question::{Recursion, SourceHeuristic};

/// Non-overlapping occurrences of `name` anywhere in `code`. The definition
/// itself accounts for one.
pub fn name_occurrences(code: &str, name: &str) -> usize {
    if name.is_empty() {
        return 0;
    }
    code.matches(name).count()
}

pub fn is_recursive(code: &str, name: &str) -> bool {
    name_occurrences(code, name) >= 2
}

pub fn evaluate_heuristic(test_id: &str, code: &str, h: &SourceHeuristic) -> RawOutcome {
    let mut problems = Vec::new();
    for s in &h.required_substrings {
        if !code.contains(s.as_str()) {
            problems.push(format!("expected to find {s:?}"));
        }
    }
    for s in &h.forbidden_substrings {
        if code.contains(s.as_str()) {
            problems.push(format!("found forbidden {s:?}"));
        }
    }
    match h.recursion {
        Recursion::Ignore => {}
        Recursion::Forbidden if is_recursive(code, &h.target_name) => {
            problems.push(format!("{} appears to be recursive", h.target_name))
        }
        Recursion::Required if !is_recursive(code, &h.target_name) => {
            problems.push(format!("{} does not appear to be recursive", h.target_name))
        }
        _ => {}
    }
    if problems.is_empty() {
        RawOutcome::pass(test_id)
    } else {
        RawOutcome {
            test_id: test_id.to_string(),
            status: RawStatus::Fail,
            got: None,
            detail: Some(problems.join("; ")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn required(s: &[&str]) -> SourceHeuristic {
        SourceHeuristic {
            required_substrings: s.iter().map(|x| x.to_string()).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn for_loop_matches_spaced_keyword() {
        let code = "def f(words):\n    for w in words:\n        pass\n";
        assert_eq!(
            evaluate_heuristic("t", code, &required(&[" for "])).status,
            RawStatus::Pass
        );
    }

    #[test]
    fn keyword_inside_identifier_does_not_match() {
        let code = "information = 1\n";
        let out = evaluate_heuristic("t", code, &required(&[" for "]));
        assert_eq!(out.status, RawStatus::Fail);
        assert!(out.detail.unwrap().contains("\" for \""));
    }

    #[test]
    fn self_call_counts_as_recursion() {
        let code = "def avgWordLength(x):\n    return avgWordLength(x)\n";
        let h = SourceHeuristic {
            recursion: Recursion::Forbidden,
            target_name: "avgWordLength".into(),
            ..Default::default()
        };
        assert_eq!(evaluate_heuristic("t", code, &h).status, RawStatus::Fail);

        let single = "def avgWordLength(x):\n    return 1.0\n";
        assert_eq!(evaluate_heuristic("t", single, &h).status, RawStatus::Pass);

        let required = SourceHeuristic {
            recursion: Recursion::Required,
            ..h
        };
        assert_eq!(evaluate_heuristic("t", code, &required).status, RawStatus::Pass);
        assert_eq!(evaluate_heuristic("t", single, &required).status, RawStatus::Fail);
    }

    #[test]
    fn gated_condition_needs_all_parts() {
        let h = SourceHeuristic {
            required_substrings: vec![" for ".into()],
            forbidden_substrings: vec![" while ".into()],
            ..Default::default()
        };
        let both = "    for x in y:\n    while True:\n";
        assert_eq!(evaluate_heuristic("t", both, &h).status, RawStatus::Fail);
        assert_eq!(evaluate_heuristic("t", "return 4.0", &h).status, RawStatus::Fail);
        assert_eq!(evaluate_heuristic("t", "    for x in y:\n", &h).status, RawStatus::Pass);
    }

    #[test]
    fn comments_are_not_stripped() {
        let code = "def f(x):\n    # f is not recursive\n    return x\n";
        assert!(is_recursive(code, "f"));
        assert_eq!(name_occurrences("aaaa", "aa"), 2);
    }
}

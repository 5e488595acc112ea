#![allow(dead_code)]

use std::path::PathBuf;

use assess_core::grader::Grader;
use assess_core::question::{parse_question, Question};
use assess_core::sandbox::{Sandbox, SandboxConfig};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn question(name: &str) -> Question {
    let path = fixtures().join("questions").join(format!("{name}.json"));
    parse_question(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

pub fn submission(question: &str, file: &str) -> String {
    std::fs::read_to_string(fixtures().join("submissions").join(question).join(file)).unwrap()
}

pub fn sandbox() -> Sandbox {
    Sandbox::new(SandboxConfig::default())
}

pub fn grader() -> Grader {
    Grader::new(sandbox())
}

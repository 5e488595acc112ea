#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use assess_core::grader::Grader;
use assess_core::question::Question;
use assess_core::sandbox::{Sandbox, SandboxConfig};
use assess_service::{load_questions, SessionService};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn questions() -> Vec<Question> {
    load_questions(&fixtures().join("questions")).unwrap()
}

pub fn submission(question: &str, file: &str) -> String {
    std::fs::read_to_string(fixtures().join("submissions").join(question).join(file)).unwrap()
}

pub fn service_in(data_dir: &Path) -> Arc<SessionService> {
    service_with(questions(), data_dir)
}

pub fn service_with(questions: Vec<Question>, data_dir: &Path) -> Arc<SessionService> {
    let grader = Grader::new(Sandbox::new(SandboxConfig::default()));
    Arc::new(SessionService::new(questions, grader, data_dir).unwrap())
}

/// A model answer that takes a while to load.
pub fn slow_model() -> String {
    format!(
        "import time\ntime.sleep(1.5)\n{}",
        submission("avg_word_length", "model.py")
    )
}

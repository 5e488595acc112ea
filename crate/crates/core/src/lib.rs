//! Assessment engine: question model, sandboxed execution, harness adapters
//! and grading.

pub mod adapters;
pub mod grader;
pub mod question;
pub mod sandbox;

pub use question::{parse_question, student_view, GradedLanguage, Question, QuestionError};

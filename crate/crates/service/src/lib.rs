//! Attempt sessions and the HTTP/JSON API used by the student front end.

pub mod config;
pub mod http;
pub mod session;
pub mod store;

pub use config::ServiceConfig;
pub use session::{load_questions, AttemptSession, ServiceError, SessionService, SubmitMode};

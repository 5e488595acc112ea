//! Attempt lifecycle: create, precheck, check, reset, close. Every state
//! change is appended to the attempt's event log before it is acknowledged.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use assess_core::grader::{best_final_mark, redact_report, Audience, GradeError, GradeReport, Grader, Mode};
use assess_core::question::{parse_question, student_view, Question, QuestionView};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{log_files, read_events, Event, EventLog};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown question `{0}`")]
    UnknownQuestion(String),
    #[error("unknown attempt `{0}`")]
    UnknownAttempt(String),
    #[error("attempt is closed")]
    Closed,
    #[error("another submission for this attempt is in progress")]
    Busy,
    #[error(transparent)]
    Grading(#[from] GradeError),
    #[error("storage: {0}")]
    Storage(#[from] std::io::Error),
    #[error("question {}: {reason}", path.display())]
    BadQuestion { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmitMode {
    Precheck,
    Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptSession {
    pub attempt_id: String,
    pub question_id: String,
    pub student_id: String,
    pub current_code: String,
    pub check_count: u32,
    /// Unredacted reports in submission order.
    pub history: Vec<GradeReport>,
    pub state: SessionState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_mark: Option<f64>,
}

impl AttemptSession {
    fn from_created(event: &Event) -> Option<Self> {
        match event {
            Event::Created {
                attempt_id,
                question_id,
                student_id,
                code,
            } => Some(AttemptSession {
                attempt_id: attempt_id.clone(),
                question_id: question_id.clone(),
                student_id: student_id.clone(),
                current_code: code.clone(),
                check_count: 0,
                history: Vec::new(),
                state: SessionState::Open,
                final_mark: None,
            }),
            _ => None,
        }
    }

    /// Rebuild a session from its full event sequence.
    pub fn replay(events: &[Event]) -> Option<Self> {
        let (first, rest) = events.split_first()?;
        let mut session = Self::from_created(first)?;
        for e in rest {
            session.apply(e);
        }
        Some(session)
    }

    fn apply(&mut self, event: &Event) {
        match event {
            Event::Created { .. } => {}
            Event::CodeUpdated { code } => self.current_code = code.clone(),
            Event::Report { report } => {
                if report.mode == Mode::Check {
                    self.check_count += 1;
                }
                self.history.push(report.clone());
            }
            Event::Closed { final_mark } => {
                self.state = SessionState::Closed;
                self.final_mark = Some(*final_mark);
            }
        }
    }

    /// Best penalised mark over the check reports, 0 when there are none.
    pub fn best_mark(&self) -> f64 {
        best_final_mark(&self.history).unwrap_or(0.0)
    }
}

/// Response to a precheck or check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitOutcome {
    #[serde(flatten)]
    pub report: GradeReport,
    pub check_count: u32,
    pub next_penalty_pct: u8,
}

/// What a student may see about their attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub attempt_id: String,
    pub question_id: String,
    pub student_id: String,
    pub current_code: String,
    pub check_count: u32,
    pub state: SessionState,
    pub next_penalty_pct: u8,
    pub best_mark: f64,
    pub total_marks: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_mark: Option<f64>,
    /// Student-redacted reports.
    pub history: Vec<GradeReport>,
}

#[derive(Debug)]
struct Slot {
    busy: AtomicBool,
    session: Mutex<AttemptSession>,
    log: Mutex<EventLog>,
}

/// Clears the busy flag when dropped.
struct BusyGuard<'a>(&'a AtomicBool);

impl Drop for BusyGuard<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::Release);
    }
}

impl Slot {
    fn acquire(&self) -> Result<BusyGuard<'_>, ServiceError> {
        self.busy
            .compare_exchange(false, true, Ordering::Acquire, Ordering::Relaxed)
            .map(|_| BusyGuard(&self.busy))
            .map_err(|_| ServiceError::Busy)
    }

    fn snapshot(&self) -> AttemptSession {
        self.session.lock().unwrap().clone()
    }

    /// Persist `event`, then apply it.
    fn record(&self, event: Event) -> Result<(), ServiceError> {
        self.log.lock().unwrap().append(&event)?;
        self.session.lock().unwrap().apply(&event);
        Ok(())
    }
}

pub struct SessionService {
    questions: HashMap<String, Arc<Question>>,
    grader: Grader,
    data_dir: PathBuf,
    attempts: Mutex<HashMap<String, Arc<Slot>>>,
}

impl SessionService {
    /// A service over `questions`, replaying any attempt logs in `data_dir`.
    pub fn new(questions: Vec<Question>, grader: Grader, data_dir: &Path) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(data_dir)?;
        let service = SessionService {
            questions: questions.into_iter().map(|q| (q.id.clone(), Arc::new(q))).collect(),
            grader,
            data_dir: data_dir.to_path_buf(),
            attempts: Mutex::new(HashMap::new()),
        };
        service.replay()?;
        Ok(service)
    }

    fn replay(&self) -> Result<(), ServiceError> {
        let mut attempts = self.attempts.lock().unwrap();
        for path in log_files(&self.data_dir)? {
            let events = read_events(&path)?;
            let Some(session) = AttemptSession::replay(&events) else {
                tracing::warn!(path = %path.display(), "skipping log without a creation event");
                continue;
            };
            let log = EventLog::open(&self.data_dir, &session.attempt_id)?;
            attempts.insert(
                session.attempt_id.clone(),
                Arc::new(Slot {
                    busy: AtomicBool::new(false),
                    session: Mutex::new(session),
                    log: Mutex::new(log),
                }),
            );
        }
        Ok(())
    }

    pub fn question(&self, id: &str) -> Result<Arc<Question>, ServiceError> {
        self.questions
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownQuestion(id.to_string()))
    }

    pub fn question_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.questions.keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn question_view(&self, id: &str) -> Result<QuestionView, ServiceError> {
        Ok(student_view(&*self.question(id)?))
    }

    fn slot(&self, attempt_id: &str) -> Result<Arc<Slot>, ServiceError> {
        self.attempts
            .lock()
            .unwrap()
            .get(attempt_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownAttempt(attempt_id.to_string()))
    }

    pub fn create_attempt(&self, question_id: &str, student_id: &str) -> Result<AttemptSession, ServiceError> {
        let q = self.question(question_id)?;
        let attempt_id = new_attempt_id();
        let created = Event::Created {
            attempt_id: attempt_id.clone(),
            question_id: q.id.clone(),
            student_id: student_id.to_string(),
            code: q.preload.clone(),
        };
        let mut log = EventLog::open(&self.data_dir, &attempt_id)?;
        log.append(&created)?;
        let session = AttemptSession::from_created(&created).expect("created event");
        self.attempts.lock().unwrap().insert(
            attempt_id,
            Arc::new(Slot {
                busy: AtomicBool::new(false),
                session: Mutex::new(session.clone()),
                log: Mutex::new(log),
            }),
        );
        Ok(session)
    }

    /// Grade `code`. A check consumes an attempt; a precheck does not. The
    /// report is persisted before it is returned, redacted for students.
    /// Blocks while the sandbox runs.
    pub fn submit(&self, attempt_id: &str, code: &str, mode: SubmitMode) -> Result<SubmitOutcome, ServiceError> {
        let slot = self.slot(attempt_id)?;
        let _busy = slot.acquire()?;
        let session = slot.snapshot();
        if session.state == SessionState::Closed {
            return Err(ServiceError::Closed);
        }
        let q = self.question(&session.question_id)?;
        if session.current_code != code {
            slot.record(Event::CodeUpdated { code: code.to_string() })?;
        }
        let report = match mode {
            SubmitMode::Precheck => self.grader.run_precheck(&q, code),
            SubmitMode::Check => self.grader.run_check(&q, code, session.check_count + 1),
        };
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                tracing::error!(attempt = attempt_id, error = %e, "grading failed");
                return Err(e.into());
            }
        };
        tracing::info!(
            attempt = attempt_id,
            mode = ?mode,
            raw = report.raw_marks,
            total = report.total_marks,
            final_fraction = report.final_fraction,
            "graded submission"
        );
        slot.record(Event::Report { report: report.clone() })?;
        let check_count = slot.snapshot().check_count;
        Ok(SubmitOutcome {
            report: redact_report(&report, &q, Audience::Student),
            check_count,
            next_penalty_pct: q.penalty_regime.penalty_for(check_count + 1),
        })
    }

    /// Restore the answer box to the question's preload.
    pub fn reset_answer(&self, attempt_id: &str) -> Result<String, ServiceError> {
        let slot = self.slot(attempt_id)?;
        let _busy = slot.acquire()?;
        let session = slot.snapshot();
        if session.state == SessionState::Closed {
            return Err(ServiceError::Closed);
        }
        let preload = self.question(&session.question_id)?.preload.clone();
        if session.current_code != preload {
            slot.record(Event::CodeUpdated { code: preload.clone() })?;
        }
        Ok(preload)
    }

    /// Close the attempt and return its best penalised mark.
    pub fn close_and_score(&self, attempt_id: &str) -> Result<f64, ServiceError> {
        let slot = self.slot(attempt_id)?;
        let _busy = slot.acquire()?;
        let session = slot.snapshot();
        if session.state == SessionState::Closed {
            return Err(ServiceError::Closed);
        }
        let final_mark = session.best_mark();
        slot.record(Event::Closed { final_mark })?;
        Ok(final_mark)
    }

    /// Full unredacted session state.
    pub fn session(&self, attempt_id: &str) -> Result<AttemptSession, ServiceError> {
        Ok(self.slot(attempt_id)?.snapshot())
    }

    pub fn summary(&self, attempt_id: &str) -> Result<SessionSummary, ServiceError> {
        let s = self.session(attempt_id)?;
        let q = self.question(&s.question_id)?;
        Ok(SessionSummary {
            best_mark: s.best_mark(),
            total_marks: q.total_marks(),
            next_penalty_pct: q.penalty_regime.penalty_for(s.check_count + 1),
            history: s
                .history
                .iter()
                .map(|r| redact_report(r, &q, Audience::Student))
                .collect(),
            attempt_id: s.attempt_id,
            question_id: s.question_id,
            student_id: s.student_id,
            current_code: s.current_code,
            check_count: s.check_count,
            state: s.state,
            final_mark: s.final_mark,
        })
    }
}

/// 128 random bits as lowercase hex.
pub fn new_attempt_id() -> String {
    let mut bytes = [0u8; 16];
    rand::rngs::OsRng.fill_bytes(&mut bytes);
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Every `*.json` question document in `dir`.
pub fn load_questions(dir: &Path) -> Result<Vec<Question>, ServiceError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut questions: Vec<Question> = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(&path)?;
        let q = parse_question(&text).map_err(|e| ServiceError::BadQuestion {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        if questions.iter().any(|other| other.id == q.id) {
            return Err(ServiceError::BadQuestion {
                path,
                reason: format!("duplicate question id `{}`", q.id),
            });
        }
        questions.push(q);
    }
    Ok(questions)
}

//! HTTP/JSON routes over [`SessionService`].

use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::session::{ServiceError, SessionService, SubmitMode};
use assess_core::grader::GradeError;

#[derive(Clone)]
struct AppState {
    service: Arc<SessionService>,
    token: Option<Arc<str>>,
}

/// Error body: `{"error": <code>, "detail": <text>}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            detail: detail.into(),
        }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let detail = e.to_string();
        match e {
            ServiceError::UnknownQuestion(_) | ServiceError::UnknownAttempt(_) => {
                ApiError::new(StatusCode::NOT_FOUND, "not_found", detail)
            }
            ServiceError::Closed => ApiError::new(StatusCode::CONFLICT, "closed", detail),
            ServiceError::Busy => ApiError::new(StatusCode::CONFLICT, "busy", detail),
            ServiceError::Grading(GradeError::Internal(_) | GradeError::Adapter(_)) => ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "internal_error",
                "grading failed for reasons outside your code; no attempt was used",
            ),
            ServiceError::Grading(_) | ServiceError::Storage(_) | ServiceError::BadQuestion { .. } => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", detail)
            }
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(ErrorBody {
            error: self.code.to_string(),
            detail: self.detail,
        });
        let mut response = (self.status, body).into_response();
        if self.code == "busy" {
            response
                .headers_mut()
                .insert(header::RETRY_AFTER, HeaderValue::from_static("1"));
        }
        response
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateAttempt {
    pub question_id: String,
    pub student_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub attempt_id: String,
    pub preload: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Submission {
    pub code: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CodeBody {
    pub code: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FinalMark {
    pub final_mark: f64,
}

/// Router for the student API. With a token, requests without
/// `Authorization: Bearer <token>` get 401.
pub fn router(service: Arc<SessionService>, token: Option<String>) -> Router {
    let state = AppState {
        service,
        token: token.map(Arc::from),
    };
    Router::new()
        .route("/questions/{id}", get(get_question))
        .route("/attempts", post(create_attempt))
        .route("/attempts/{id}", get(get_attempt))
        .route("/attempts/{id}/precheck", post(precheck))
        .route("/attempts/{id}/check", post(check))
        .route("/attempts/{id}/reset", post(reset))
        .route("/attempts/{id}/close", post(close))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state)
}

async fn require_token(State(state): State<AppState>, request: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let presented = request
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token.as_ref()) {
            return ApiError::new(
                StatusCode::UNAUTHORIZED,
                "unauthorized",
                "missing or wrong bearer token",
            )
            .into_response();
        }
    }
    next.run(request).await
}

/// Run a blocking service call off the async executor.
fn blocking<T, F>(state: &AppState, f: F) -> impl Future<Output = Result<T, ApiError>>
where
    T: Send + 'static,
    F: FnOnce(&SessionService) -> Result<T, ServiceError> + Send + 'static,
{
    let service = state.service.clone();
    async move {
        tokio::task::spawn_blocking(move || f(&service))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e.to_string()))?
            .map_err(ApiError::from)
    }
}

async fn get_question(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(state.service.question_view(&id)?).into_response())
}

async fn create_attempt(
    State(state): State<AppState>,
    body: Result<Json<CreateAttempt>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let session = blocking(&state, move |s| s.create_attempt(&req.question_id, &req.student_id)).await?;
    let created = Created {
        attempt_id: session.attempt_id,
        preload: session.current_code,
    };
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn get_attempt(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(state.service.summary(&id)?).into_response())
}

async fn submit(
    state: AppState,
    id: String,
    body: Result<Json<Submission>, JsonRejection>,
    mode: SubmitMode,
) -> Result<Response, ApiError> {
    let Json(sub) = body?;
    let outcome = blocking(&state, move |s| s.submit(&id, &sub.code, mode)).await?;
    Ok(match mode {
        SubmitMode::Precheck => Json(outcome.report).into_response(),
        SubmitMode::Check => Json(outcome).into_response(),
    })
}

async fn precheck(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Submission>, JsonRejection>,
) -> Result<Response, ApiError> {
    submit(state, id, body, SubmitMode::Precheck).await
}

async fn check(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Submission>, JsonRejection>,
) -> Result<Response, ApiError> {
    submit(state, id, body, SubmitMode::Check).await
}

async fn reset(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let code = blocking(&state, move |s| s.reset_answer(&id)).await?;
    Ok(Json(CodeBody { code }).into_response())
}

async fn close(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let final_mark = blocking(&state, move |s| s.close_and_score(&id)).await?;
    Ok(Json(FinalMark { final_mark }).into_response())
}

/// Serve until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    service: Arc<SessionService>,
    token: Option<String>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service, token))
        .with_graceful_shutdown(shutdown)
        .await
}

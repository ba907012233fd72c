//! HTTP API: tracing, repair sessions and the reject loop.
//!
//! Sessions live in memory and expire after a period without requests.
//! Each repair runs on the blocking pool under a timeout; a request that
//! times out answers `{"status": "timeout"}` and leaves the session as it was.

use std::collections::HashMap;
use std::future::Future;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Map, Value as JsonValue};
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;
use tracefix_core::extfun::Registry;
use tracefix_core::lang::{parse_program, Program};
use tracefix_core::solver::{Feedback, OptionsSpec, Outcome, Session};
use tracefix_core::tracer::{decode_input, execute, FaultReason, ManipulationFile, DEFAULT_FUEL};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Idle time after which a session is dropped.
    pub session_ttl: Duration,
    /// Wall-clock limit for one repair.
    pub repair_timeout: Duration,
    /// Directory served at `/` for the UI bundle.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            session_ttl: Duration::from_secs(3600),
            repair_timeout: Duration::from_secs(60),
            static_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SessionState {
    Open,
    Closed,
}

struct Record {
    id: String,
    program_text: String,
    original: JsonValue,
    manipulation: ManipulationFile,
    options: OptionsSpec,
    session: Session,
    state: SessionState,
    last_access: Instant,
}

impl Record {
    fn snapshot(&self) -> JsonValue {
        let history: Vec<JsonValue> = self.session.history.iter().map(Outcome::to_json).collect();
        json!({
            "session_id": self.id,
            "program": self.program_text,
            "original_trace": self.original,
            "manipulation": self.manipulation,
            "options": self.options,
            "history": history,
            "rejected": self.session.rejected,
            "disallowed": self.session.disallowed,
            "state": match self.state {
                SessionState::Open => "open",
                SessionState::Closed => "closed",
            },
        })
    }
}

type Shared = Arc<tokio::sync::Mutex<Record>>;

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    sessions: Arc<Mutex<HashMap<String, Shared>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    /// Looks up a session, dropping expired ones first.
    fn session(&self, id: &str) -> Option<Shared> {
        let mut map = self.sessions.lock().expect("session map poisoned");
        let ttl = self.config.session_ttl;
        map.retain(|_, r| r.try_lock().map_or(true, |r| r.last_access.elapsed() < ttl));
        map.get(id).cloned()
    }

    fn insert(&self, record: Record) {
        let id = record.id.clone();
        let mut map = self.sessions.lock().expect("session map poisoned");
        map.insert(id, Arc::new(tokio::sync::Mutex::new(record)));
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: JsonValue,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> Self {
        ApiError {
            status,
            body: json!({"error": message.to_string()}),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, r.body_text())
    }
}

type ApiResult = Result<Json<JsonValue>, ApiError>;

fn parse(source: &str) -> Result<Program, ApiError> {
    parse_program(source).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))
}

/// Runs `f` on the blocking pool; `None` when it outlives the timeout.
async fn with_timeout<T: Send + 'static>(
    limit: Duration,
    f: impl FnOnce() -> T + Send + 'static,
) -> Result<Option<T>, ApiError> {
    match tokio::time::timeout(limit, tokio::task::spawn_blocking(f)).await {
        Ok(Ok(v)) => Ok(Some(v)),
        Ok(Err(e)) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e)),
        Err(_) => Ok(None),
    }
}

fn timeout_result() -> JsonValue {
    json!({"status": "timeout"})
}

async fn health() -> Json<JsonValue> {
    Json(json!({"ok": true}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceRequest {
    program: String,
    input: Map<String, JsonValue>,
    fuel: Option<usize>,
}

async fn trace(body: Result<Json<TraceRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body?;
    let program = parse(&req.program)?;
    let input = decode_input(&program, &req.input)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let fuel = req.fuel.unwrap_or(DEFAULT_FUEL);
    match execute(&program, &input, fuel) {
        Ok(t) => Ok(Json(t.to_json())),
        Err(e)
            if matches!(
                e.fault.reason,
                FaultReason::MissingInput(_) | FaultReason::BadInput { .. }
            ) =>
        {
            Err(ApiError::new(StatusCode::BAD_REQUEST, e.fault))
        }
        Err(e) => Err(ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({
                "error": e.fault.to_string(),
                "fault": {"location": e.fault.location, "reason": e.fault.reason.to_string()},
                "trace": e.partial.to_json(),
            }),
        }),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionRequest {
    program: String,
    manipulation: ManipulationFile,
    #[serde(default)]
    options: OptionsSpec,
}

fn state_after(o: &Outcome) -> SessionState {
    match o {
        Outcome::Repaired(_) => SessionState::Open,
        Outcome::NoRepair(_) => SessionState::Closed,
    }
}

async fn create_session(
    State(app): State<AppState>,
    body: Result<Json<SessionRequest>, JsonRejection>,
) -> ApiResult {
    let Json(req) = body?;
    let program = parse(&req.program)?;
    let resolved = req
        .manipulation
        .resolve(&program)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e))?;
    let options = req
        .options
        .to_options(resolved.tests.clone())
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let session = Session::new(
        program,
        resolved.manipulation.clone(),
        options,
        Registry::standard(),
    )
    .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let mut record = Record {
        id: uuid::Uuid::new_v4().simple().to_string(),
        program_text: req.program,
        original: resolved.original.to_json(),
        manipulation: req.manipulation,
        options: req.options,
        session: session.clone(),
        state: SessionState::Open,
        last_access: Instant::now(),
    };
    let ran = with_timeout(app.config.repair_timeout, move || {
        let mut s = session;
        s.propose();
        s
    })
    .await?;
    let result = match ran {
        Some(s) => {
            let last = s.last().expect("just proposed");
            record.state = state_after(last);
            let result = last.to_json();
            record.session = s;
            result
        }
        None => timeout_result(),
    };
    let id = record.id.clone();
    app.insert(record);
    Ok(Json(json!({"session_id": id, "result": result})))
}

async fn reject(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Feedback>, JsonRejection>,
) -> ApiResult {
    let Json(feedback) = body?;
    let shared = app
        .session(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))?;
    let mut record = shared.lock().await;
    record.last_access = Instant::now();
    if record.state == SessionState::Closed {
        return Err(ApiError::new(StatusCode::CONFLICT, "session is closed"));
    }
    let session = record.session.clone();
    let ran = with_timeout(app.config.repair_timeout, move || {
        let mut s = session;
        s.next_repair(feedback);
        s
    })
    .await?;
    let result = match ran {
        Some(s) => {
            let last = s.last().expect("just proposed");
            record.state = state_after(last);
            let result = last.to_json();
            record.session = s;
            result
        }
        None => timeout_result(),
    };
    record.last_access = Instant::now();
    Ok(Json(json!({"result": result})))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let shared = app
        .session(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))?;
    let mut record = shared.lock().await;
    record.last_access = Instant::now();
    Ok(Json(record.snapshot()))
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.config.static_dir.clone();
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/trace", post(trace))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session))
        .route("/api/session/{id}/reject", post(reject))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(CorsLayer::permissive())
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::new(config)))
        .with_graceful_shutdown(shutdown)
        .await
}

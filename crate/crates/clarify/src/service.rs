//! JSON-over-HTTP chat API.
//!
//! ```text
//! GET  /health
//! POST /sessions                      -> new session token
//! POST /sessions/{token}/messages     {"text": "..."}
//! POST /sessions/{token}/replies      {"type": "confirm", "yes": true}, ...
//! GET  /sessions/{token}/transcript
//! ```
//!
//! Errors are `{"error": {"code", "message", "expected"}}` with 404 for
//! unknown or expired sessions, 409 for replies the current stage does not
//! accept and 400 for malformed bodies.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clarify_core::dialogue::{ReplyKind, TranscriptEntry};
use clarify_core::{BotAction, Engine, ProtocolError, Session, Stage, UserReply};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use tokio::time::Instant;

pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 60);

struct Slot {
    session: Session,
    last_seen: Instant,
}

/// Live sessions keyed by an unguessable token. Each session has its own
/// lock so concurrent conversations never wait on each other.
pub struct SessionStore {
    slots: Mutex<HashMap<String, Arc<tokio::sync::Mutex<Slot>>>>,
    ttl: Duration,
    next_message: AtomicU64,
    log: Option<Mutex<BufWriter<File>>>,
}

#[derive(Serialize)]
struct LogLine<'a> {
    session: &'a str,
    message_id: u64,
    at: u64,
    reply: &'a UserReply,
    action: &'a BotAction,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            slots: Mutex::new(HashMap::new()),
            ttl,
            next_message: AtomicU64::new(1),
            log: None,
        }
    }

    /// Appends every handled turn to a JSONL file.
    pub fn with_transcript_log(mut self, path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.log = Some(Mutex::new(BufWriter::new(file)));
        Ok(self)
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn create(&self) -> String {
        let mut bytes = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut bytes);
        let token: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
        let slot = Slot {
            session: Session::new(token.clone()),
            last_seen: Instant::now(),
        };
        self.slots
            .lock()
            .expect("session map poisoned")
            .insert(token.clone(), Arc::new(tokio::sync::Mutex::new(slot)));
        token
    }

    fn get(&self, token: &str) -> Option<Arc<tokio::sync::Mutex<Slot>>> {
        self.slots.lock().expect("session map poisoned").get(token).cloned()
    }

    fn remove(&self, token: &str) {
        self.slots.lock().expect("session map poisoned").remove(token);
    }

    /// Drops sessions idle for longer than the TTL; returns how many.
    pub fn sweep(&self) -> usize {
        let now = Instant::now();
        let mut slots = self.slots.lock().expect("session map poisoned");
        let before = slots.len();
        // A slot locked right now is in use, so it is not idle.
        slots.retain(|_, slot| match slot.try_lock() {
            Ok(slot) => now.duration_since(slot.last_seen) <= self.ttl,
            Err(_) => true,
        });
        before - slots.len()
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn log_turn(&self, line: &LogLine<'_>) {
        let Some(log) = &self.log else { return };
        let mut out = log.lock().expect("transcript log poisoned");
        let written = serde_json::to_writer(&mut *out, line)
            .map_err(io::Error::from)
            .and_then(|()| out.write_all(b"\n"))
            .and_then(|()| out.flush());
        if let Err(err) = written {
            tracing::warn!(%err, "could not append to transcript log");
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub store: Arc<SessionStore>,
}

impl AppState {
    pub fn new(engine: Engine, store: SessionStore) -> Self {
        Self {
            engine: Arc::new(engine),
            store: Arc::new(store),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiResponse {
    pub session: String,
    pub message_id: u64,
    pub stage: Stage,
    pub action: BotAction,
    /// Replies the new stage accepts.
    pub expected: Vec<ReplyKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session: String,
    pub stage: Stage,
    pub expected: Vec<ReplyKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptResponse {
    pub session: String,
    pub stage: Stage,
    pub transcript: Vec<TranscriptEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<ReplyKind>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug)]
pub enum ApiError {
    UnknownSession,
    Malformed(String),
    Protocol(ProtocolError, Stage),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message, expected) = match self {
            ApiError::UnknownSession => (
                StatusCode::NOT_FOUND,
                "unknown_session",
                "no such session (it may have expired)".to_owned(),
                None,
            ),
            ApiError::Malformed(message) => (StatusCode::BAD_REQUEST, "malformed_request", message, None),
            ApiError::Protocol(err, stage) => {
                let code = match err {
                    ProtocolError::UnexpectedReply { .. } => "unexpected_reply",
                    ProtocolError::OutOfRange { .. } => "option_out_of_range",
                };
                (StatusCode::CONFLICT, code, err.to_string(), Some(stage.accepts().to_vec()))
            }
        };
        let body = ErrorBody {
            error: ErrorDetail {
                code: code.to_owned(),
                message,
                expected,
            },
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Deserialize)]
struct MessageBody {
    text: String,
}

fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|err| ApiError::Malformed(err.to_string()))
}

fn epoch_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{token}/messages", post(post_message))
        .route("/sessions/{token}/replies", post(post_reply))
        .route("/sessions/{token}/transcript", get(get_transcript))
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok"}))
}

async fn create_session(State(state): State<AppState>) -> impl IntoResponse {
    let token = state.store.create();
    tracing::debug!(session = %token, "session created");
    let body = SessionCreated {
        session: token,
        stage: Stage::Idle,
        expected: Stage::Idle.accepts().to_vec(),
    };
    (StatusCode::CREATED, Json(body))
}

async fn post_message(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
    body: Bytes,
) -> Result<Json<ApiResponse>, ApiError> {
    let MessageBody { text } = parse(&body)?;
    if text.trim().is_empty() {
        return Err(ApiError::Malformed("message text is empty".into()));
    }
    turn(&state, &token, UserReply::Text { text }).await
}

async fn post_reply(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
    body: Bytes,
) -> Result<Json<ApiResponse>, ApiError> {
    let reply: UserReply = parse(&body)?;
    turn(&state, &token, reply).await
}

async fn live_slot(
    state: &AppState,
    token: &str,
) -> Result<Arc<tokio::sync::Mutex<Slot>>, ApiError> {
    let slot = state.store.get(token).ok_or(ApiError::UnknownSession)?;
    let expired = {
        let guard = slot.lock().await;
        guard.last_seen.elapsed() > state.store.ttl
    };
    if expired {
        state.store.remove(token);
        return Err(ApiError::UnknownSession);
    }
    Ok(slot)
}

async fn turn(state: &AppState, token: &str, reply: UserReply) -> Result<Json<ApiResponse>, ApiError> {
    let slot = live_slot(state, token).await?;
    let mut slot = slot.lock().await;
    let at = epoch_millis();
    let action = state
        .engine
        .handle(&mut slot.session, reply.clone(), at)
        .map_err(|err| ApiError::Protocol(err, slot.session.stage()))?;
    slot.last_seen = Instant::now();
    let message_id = state.store.next_message.fetch_add(1, Ordering::Relaxed);
    state.store.log_turn(&LogLine {
        session: token,
        message_id,
        at,
        reply: &reply,
        action: &action,
    });
    let stage = slot.session.stage();
    Ok(Json(ApiResponse {
        session: token.to_owned(),
        message_id,
        stage,
        action,
        expected: stage.accepts().to_vec(),
    }))
}

async fn get_transcript(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
) -> Result<Json<TranscriptResponse>, ApiError> {
    let slot = live_slot(&state, &token).await?;
    let slot = slot.lock().await;
    Ok(Json(TranscriptResponse {
        session: token,
        stage: slot.session.stage(),
        transcript: slot.session.transcript().to_vec(),
    }))
}

/// Serves until Ctrl-C, sweeping idle sessions once a minute.
pub async fn serve(addr: SocketAddr, state: AppState) -> io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let store = Arc::clone(&state.store);
    let sweeper = tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let dropped = store.sweep();
            if dropped > 0 {
                tracing::debug!(dropped, "expired sessions removed");
            }
        }
    });
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    sweeper.abort();
    result
}

//! HTTP/JSON front end for the vine robot simulator.
//!
//! Stateless operations (calibration, benchmark, scenario runs, single
//! equilibrium solves) sit next to live sessions that stream snapshots as
//! newline-delimited JSON.

mod error;
mod session;

use std::collections::HashMap;
use std::convert::Infallible;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::{Body, Bytes};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, StreamExt};
use serde::de::DeserializeOwned;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, oneshot};
use vinesim_core::bench::{run_benchmark_comparison, BenchmarkTable};
use vinesim_core::calibration::{embedded_datasets, CalibratedModel, CalibrationReport, Catalog};
use vinesim_core::protocol::{
    CreateSessionRequest, Health, PreviewRequest, PreviewResponse, RunRequest, SessionCore, SessionCreated,
    SessionMessage, ShapeView, Snapshot, SolveRequest,
};
use vinesim_core::scenario::{run_scenario, RunRecord};

pub use error::ApiError;
use session::{SessionCmd, SessionHandle};

#[derive(Clone)]
pub struct AppState {
    model: &'static CalibratedModel,
    sessions: Arc<Mutex<HashMap<String, SessionHandle>>>,
}

impl AppState {
    pub fn new() -> Result<Self, ApiError> {
        Ok(Self {
            model: CalibratedModel::standard()?,
            sessions: Arc::default(),
        })
    }

    fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .lock()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("session {id}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/catalog", get(catalog))
        .route("/v1/catalog/{key}", get(catalog_entry))
        .route("/v1/calibrate", post(calibrate))
        .route("/v1/bench", get(bench))
        .route("/v1/scenarios/run", post(run))
        .route("/v1/solve", post(solve))
        .route("/v1/sessions", post(create_session).get(list_sessions))
        .route("/v1/sessions/{id}", get(peek_session).delete(close_session))
        .route("/v1/sessions/{id}/stream", get(stream_session))
        .route("/v1/sessions/{id}/commands", post(send_commands))
        .route("/v1/sessions/{id}/preview", post(preview))
        .with_state(state)
}

/// Binds `addr`. Fails with `AddrInUse` when the port is taken.
pub async fn bind(addr: SocketAddr) -> std::io::Result<TcpListener> {
    TcpListener::bind(addr).await
}

/// Serves until `shutdown` resolves.
pub async fn serve(listener: TcpListener, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    let state = AppState::new().map_err(|e| std::io::Error::other(e.message))?;
    tracing::info!(addr = ?listener.local_addr().ok(), "serving");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Starts a server on `addr` in the background and returns its address.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<SocketAddr> {
    let listener = bind(addr).await?;
    let local = listener.local_addr()?;
    let state = AppState::new().map_err(|e| std::io::Error::other(e.message))?;
    tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, router(state)).await {
            tracing::error!("server stopped: {e}");
        }
    });
    Ok(local)
}

fn parse<T: DeserializeOwned>(body: &str) -> Result<T, ApiError> {
    serde_json::from_str(body).map_err(ApiError::parse)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn health(State(s): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        sessions: s.sessions.lock().expect("session map poisoned").len(),
    })
}

async fn catalog() -> Json<&'static Catalog> {
    Json(embedded_datasets())
}

async fn catalog_entry(Path(key): Path<String>) -> Result<Response, ApiError> {
    let c = embedded_datasets();
    if let Ok(entry) = c.entry(&key) {
        return Ok(Json(entry).into_response());
    }
    Ok(Json(c.dataset(&key)?).into_response())
}

async fn calibrate() -> Result<Json<CalibrationReport>, ApiError> {
    blocking(|| Ok(CalibratedModel::fit(embedded_datasets())?.report()?))
        .await
        .map(Json)
}

async fn bench(State(s): State<AppState>) -> Result<Json<BenchmarkTable>, ApiError> {
    let model = s.model;
    blocking(move || Ok(run_benchmark_comparison(model)?)).await.map(Json)
}

async fn run(State(s): State<AppState>, body: String) -> Result<Json<RunRecord>, ApiError> {
    let req: RunRequest = parse(&body)?;
    let model = s.model;
    blocking(move || run_scenario(&req.scenario()?, model).map_err(ApiError::run_failed))
        .await
        .map(Json)
}

async fn solve(State(s): State<AppState>, body: String) -> Result<Json<ShapeView>, ApiError> {
    let req: SolveRequest = parse(&body)?;
    let model = s.model;
    blocking(move || Ok(req.solve(model)?)).await.map(Json)
}

async fn create_session(
    State(s): State<AppState>,
    body: String,
) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let req: CreateSessionRequest = parse(&body)?;
    let core = SessionCore::new(&req, s.model)?;
    let id = uuid::Uuid::new_v4().to_string();
    let handle = SessionHandle::spawn(&id, core, s.model);
    let hello = handle.hello.clone();
    s.sessions
        .lock()
        .expect("session map poisoned")
        .insert(id.clone(), handle);
    tracing::info!(%id, "session created");
    Ok((StatusCode::CREATED, Json(SessionCreated { id, hello })))
}

async fn list_sessions(State(s): State<AppState>) -> Json<Vec<String>> {
    let mut ids: Vec<String> = s
        .sessions
        .lock()
        .expect("session map poisoned")
        .keys()
        .cloned()
        .collect();
    ids.sort();
    Json(ids)
}

async fn request<T>(
    handle: &SessionHandle,
    make: impl FnOnce(oneshot::Sender<T>) -> SessionCmd,
) -> Result<T, ApiError> {
    let (tx, rx) = oneshot::channel();
    handle
        .commands
        .send(make(tx))
        .await
        .map_err(|_| ApiError::not_found("session has ended"))?;
    rx.await.map_err(|_| ApiError::not_found("session has ended"))
}

async fn peek_session(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<Snapshot>, ApiError> {
    let handle = s.session(&id)?;
    Ok(Json(request(&handle, SessionCmd::Peek).await??))
}

async fn close_session(State(s): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let handle = s
        .sessions
        .lock()
        .expect("session map poisoned")
        .remove(&id)
        .ok_or_else(|| ApiError::not_found(format!("session {id}")))?;
    let _ = handle.commands.send(SessionCmd::Close).await;
    tracing::info!(%id, "session closed");
    Ok(StatusCode::NO_CONTENT)
}

async fn send_commands(
    State(s): State<AppState>,
    Path(id): Path<String>,
    body: String,
) -> Result<Json<Vec<SessionMessage>>, ApiError> {
    let handle = s.session(&id)?;
    Ok(Json(request(&handle, |tx| SessionCmd::Lines(body, tx)).await?))
}

async fn preview(
    State(s): State<AppState>,
    Path(id): Path<String>,
    body: String,
) -> Result<Json<PreviewResponse>, ApiError> {
    let req: PreviewRequest = parse(&body)?;
    let handle = s.session(&id)?;
    Ok(Json(request(&handle, |tx| SessionCmd::Preview(req, tx)).await??))
}

fn ndjson(m: &SessionMessage) -> Result<Bytes, Infallible> {
    let mut line =
        serde_json::to_vec(m).unwrap_or_else(|e| format!(r#"{{"type":"error","message":"{e}"}}"#).into_bytes());
    line.push(b'\n');
    Ok(Bytes::from(line))
}

async fn stream_session(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let handle = s.session(&id)?;
    let rx = handle.stream.subscribe();
    let live = stream::unfold(Some(rx), |rx| async move {
        let mut rx = rx?;
        let m = match rx.recv().await {
            Ok(m @ SessionMessage::Closed { .. }) => return Some((m, None)),
            Ok(m) => m,
            Err(broadcast::error::RecvError::Lagged(n)) => SessionMessage::Error {
                id: None,
                message: format!("stream lagged, {n} messages dropped"),
            },
            Err(broadcast::error::RecvError::Closed) => return None,
        };
        Some((m, Some(rx)))
    });
    let body = stream::once(async move { handle.hello })
        .chain(live)
        .map(|m| ndjson(&m));
    Ok((
        [(header::CONTENT_TYPE, "application/x-ndjson")],
        Body::from_stream(body),
    )
        .into_response())
}

//! JSON HTTP API over a shared, swappable [`Engine`].
//!
//! | Route | Response |
//! |---|---|
//! | `GET /api/health` | `{"status":"ok"}` |
//! | `POST /api/search` `{"query","k"?,"dedup"?}` | [`SearchResponse`](super::SearchResponse) |
//! | `GET /api/notebooks/{id}?anchor={index}` | [`NotebookDetail`](super::NotebookDetail) |
//! | `GET /api/links?notebook={id}&cell={index}&n={int}` | `{"linked":[index]}` |
//!
//! Errors carry `{"error": code, "message": text}`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tower_http::services::ServeDir;

use super::{Engine, SearchRequest};
use crate::corpus::CellKind;
use crate::error::Error;

/// Link threshold used when a request omits `n`.
pub const DEFAULT_LINK_THRESHOLD: usize = 2;

/// Shared engine slot. Requests clone the inner `Arc`, so a new index can be
/// swapped in without disturbing requests already in flight.
#[derive(Clone, Default)]
pub struct AppState {
    engine: Arc<RwLock<Option<Arc<Engine>>>>,
}

impl AppState {
    pub fn new(engine: Option<Engine>) -> Self {
        Self { engine: Arc::new(RwLock::new(engine.map(Arc::new))) }
    }

    pub fn swap(&self, engine: Engine) {
        *self.engine.write().expect("engine lock poisoned") = Some(Arc::new(engine));
    }

    fn current(&self) -> Result<Arc<Engine>, ApiError> {
        self.engine
            .read()
            .expect("engine lock poisoned")
            .clone()
            .ok_or(ApiError(Error::IndexNotBuilt))
    }
}

pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::EmptyQuery | Error::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            Error::NotFound(_) | Error::AnchorNotFound(_) => StatusCode::NOT_FOUND,
            Error::IndexNotBuilt => StatusCode::SERVICE_UNAVAILABLE,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = json!({"error": self.0.code(), "message": self.0.to_string()});
        (status, Json(body)).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(Error::InvalidRequest(msg.into()))
}

fn param<T: std::str::FromStr>(
    params: &HashMap<String, String>,
    name: &str,
) -> Result<Option<T>, ApiError> {
    params
        .get(name)
        .map(|v| v.parse().map_err(|_| bad_request(format!("invalid {name}: {v:?}"))))
        .transpose()
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

async fn search(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: SearchRequest = serde_json::from_slice(&body)
        .map_err(|e| bad_request(format!("invalid search body: {e}")))?;
    let engine = state.current()?;
    Ok(Json(engine.search(&req)?).into_response())
}

async fn notebook(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let engine = state.current()?;
    let anchor = match param::<usize>(&params, "anchor")? {
        Some(a) => a,
        None => engine
            .notebook(&id)
            .and_then(|nb| nb.cells.iter().find(|c| c.kind == CellKind::Code))
            .map(|c| c.index)
            .ok_or_else(|| ApiError(Error::NotFound(format!("code cell in notebook {id}"))))?,
    };
    Ok(Json(engine.notebook_detail(&id, anchor)?).into_response())
}

#[derive(Serialize)]
struct Links {
    linked: Vec<usize>,
}

async fn links(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let engine = state.current()?;
    let notebook: String =
        param(&params, "notebook")?.ok_or_else(|| bad_request("missing notebook"))?;
    let cell: usize = param(&params, "cell")?.ok_or_else(|| bad_request("missing cell"))?;
    let n: usize = param(&params, "n")?.unwrap_or(DEFAULT_LINK_THRESHOLD);
    Ok(Json(Links { linked: engine.links(&notebook, cell, n)? }).into_response())
}

/// API routes, plus static files from `static_dir` for every other path.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/search", post(search))
        .route("/api/notebooks/{id}", get(notebook))
        .route("/api/links", get(links))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

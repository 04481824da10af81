//! JSON-over-HTTP session API under `/api/v1`.
//!
//! Each session owns one dataset and a versioned [`SessionConfig`]. Config
//! mutations are serialized per session; renders run on the blocking pool
//! against a config snapshot and are re-run if the config moved on while
//! they were computing, so a response never carries a stale version.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{PatchError, SessionConfig};
use crate::data::DataTable;
use crate::pipeline::{Image, Pipeline, PipelineError};
use crate::render::RenderError;
use crate::warp::WarpError;

pub const VERSION_HEADER: &str = "x-config-version";
/// Env var that overrides `serve --port`.
pub const PORT_ENV: &str = "GBC_CHROMA_PORT";

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Unprocessable(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(json!({ "error": msg }))).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let msg = e.to_string();
        match e {
            PipelineError::UnknownAttribute(_) | PipelineError::UnknownSample(_) => ApiError::NotFound(msg),
            PipelineError::Data(_) => ApiError::BadRequest(msg),
            PipelineError::Config(_)
            | PipelineError::Color(_)
            | PipelineError::Layout(_)
            | PipelineError::Warp(WarpError::InvalidParameter(_) | WarpError::DegenerateCloud | WarpError::TooFewPoints { .. })
            | PipelineError::Render(
                RenderError::TooFewSamples { .. } | RenderError::InvalidGrid(_) | RenderError::InvalidKernel(_),
            ) => ApiError::Unprocessable(msg),
            _ => ApiError::Internal(msg),
        }
    }
}

pub struct Session {
    pub id: String,
    pub pipeline: Pipeline,
    config: RwLock<(u64, SessionConfig)>,
}

impl Session {
    pub fn new(id: String, table: DataTable) -> Self {
        Self { id, pipeline: Pipeline::new(table), config: RwLock::new((1, SessionConfig::default())) }
    }

    pub fn snapshot(&self) -> (u64, SessionConfig) {
        self.config.read().clone()
    }

    pub fn version(&self) -> u64 {
        self.config.read().0
    }

    /// Applies a JSON merge patch; the whole read-merge-write happens under
    /// the session's write lock.
    pub fn patch(&self, patch: &serde_json::Value) -> Result<(u64, SessionConfig), PatchError> {
        let mut guard = self.config.write();
        let next = guard.1.merged(patch)?;
        guard.0 += 1;
        guard.1 = next;
        Ok(guard.clone())
    }
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl AppState {
    pub fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions.read().get(id).cloned().ok_or_else(|| ApiError::NotFound(format!("no session `{id}`")))
    }

    pub fn insert(&self, table: DataTable) -> Arc<Session> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Arc::new(Session::new(id.clone(), table));
        self.sessions.write().insert(id, session.clone());
        session
    }
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/config", get(get_config).patch(patch_config))
        .route("/sessions/{id}/layout", get(get_layout))
        .route("/sessions/{id}/legend", get(get_legend))
        .route("/sessions/{id}/render", get(get_render))
        .route("/sessions/{id}/render/attribute/{name}", get(get_attribute_render))
        .route("/sessions/{id}/samples/nearest", get(get_nearest))
        .route("/sessions/{id}/samples/{idx}", get(get_sample));
    let app = Router::new().nest("/api/v1", api).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => app,
    }
}

pub async fn serve(addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(AppState::default()), static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn versioned<T: IntoResponse>(version: u64, body: T) -> Response {
    let mut resp = body.into_response();
    resp.headers_mut().insert(VERSION_HEADER, HeaderValue::from(version));
    resp
}

fn png_response(version: u64, img: &Image) -> Response {
    let mut resp = Response::new(Body::from(img.png.clone()));
    resp.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    resp.headers_mut().insert(VERSION_HEADER, HeaderValue::from(version));
    resp
}

/// Runs `f` on the blocking pool against the current config, retrying until
/// the config version is unchanged across the computation.
async fn compute<T, F>(session: &Arc<Session>, f: F) -> Result<(u64, T), ApiError>
where
    T: Send + 'static,
    F: Fn(&Pipeline, &SessionConfig) -> Result<T, PipelineError> + Send + Sync + Clone + 'static,
{
    loop {
        let (version, cfg) = session.snapshot();
        let s = session.clone();
        let f = f.clone();
        let out = tokio::task::spawn_blocking(move || f(&s.pipeline, &cfg))
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))??;
        if session.version() == version {
            return Ok((version, out));
        }
    }
}

#[derive(Serialize)]
struct Created {
    id: String,
    attributes: Vec<String>,
    m: usize,
    n: usize,
    version: u64,
}

async fn read_csv_body(req: Request) -> Result<Bytes, ApiError> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    if !is_multipart {
        return Bytes::from_request(req, &()).await.map_err(|e| ApiError::BadRequest(e.to_string()));
    }
    let mut mp = Multipart::from_request(req, &()).await.map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let mut first = None;
    while let Some(field) = mp.next_field().await.map_err(|e| ApiError::BadRequest(e.to_string()))? {
        let preferred = matches!(field.name(), Some("file" | "csv" | "data"));
        let bytes = field.bytes().await.map_err(|e| ApiError::BadRequest(e.to_string()))?;
        if preferred {
            return Ok(bytes);
        }
        first.get_or_insert(bytes);
    }
    first.ok_or_else(|| ApiError::BadRequest("multipart body has no fields".into()))
}

async fn create_session(State(state): State<Arc<AppState>>, req: Request) -> Result<Response, ApiError> {
    let body = read_csv_body(req).await?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::BadRequest("CSV must be UTF-8".into()))?;
    let table = DataTable::from_csv_str(text).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let session = state.insert(table);
    let t = session.pipeline.table();
    let created = Created {
        id: session.id.clone(),
        attributes: t.attribute_names().to_vec(),
        m: t.n_samples(),
        n: t.n_attributes(),
        version: session.version(),
    };
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    match state.sessions.write().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::NotFound(format!("no session `{id}`"))),
    }
}

#[derive(Serialize)]
struct ConfigBody {
    version: u64,
    config: SessionConfig,
}

async fn get_config(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (version, config) = state.session(&id)?.snapshot();
    Ok(versioned(version, Json(ConfigBody { version, config })))
}

async fn patch_config(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let patch: serde_json::Value =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("invalid JSON: {e}")))?;
    let (version, config) = session.patch(&patch).map_err(|e| match e {
        PatchError::Malformed(m) => ApiError::BadRequest(m),
        PatchError::Invalid(e) => ApiError::Unprocessable(e.to_string()),
    })?;
    Ok(versioned(version, Json(ConfigBody { version, config })))
}

async fn get_layout(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let (v, layout) = compute(&session, |p, cfg| Ok(p.layout(cfg)?.model.clone())).await?;
    Ok(versioned(v, Json(layout)))
}

async fn get_legend(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let (v, legend) = compute(&session, |p, cfg| p.legend(cfg)).await?;
    Ok(versioned(v, Json(legend)))
}

async fn get_render(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let (v, img) = compute(&session, |p, cfg| p.map(cfg)).await?;
    Ok(png_response(v, &img))
}

async fn get_attribute_render(
    State(state): State<Arc<AppState>>,
    Path((id, name)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let (v, img) = compute(&session, move |p, cfg| p.heatmap_by_name(cfg, &name)).await?;
    Ok(png_response(v, &img))
}

async fn get_sample(
    State(state): State<Arc<AppState>>,
    Path((id, idx)): Path<(String, usize)>,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let (v, info) = compute(&session, move |p, cfg| p.sample(cfg, idx)).await?;
    Ok(versioned(v, Json(info)))
}

#[derive(Deserialize)]
struct NearestQuery {
    x: f64,
    y: f64,
}

async fn get_nearest(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<NearestQuery>,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    if !(q.x.is_finite() && q.y.is_finite()) {
        return Err(ApiError::BadRequest("x and y must be finite".into()));
    }
    let (v, info) = compute(&session, move |p, cfg| p.sample(cfg, p.nearest_sample(q.x, q.y))).await?;
    Ok(versioned(v, Json(info)))
}

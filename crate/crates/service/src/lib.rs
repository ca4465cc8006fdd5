//! HTTP JSON API over a [`ReviewStore`].
//!
//! Routes:
//!
//! - `GET /api/sample?stratum=&labeled=&page=&page_size=`
//! - `GET /api/emails/{id}/perspectives`
//! - `GET /api/emails/{id}/labels`, `POST /api/emails/{id}/labels`
//! - `GET /api/stats`
//!
//! Email ids contain `/`, so clients percent-encode them into one path
//! segment. Everything outside `/api` is served from the static directory
//! when one is configured.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, PoisonError, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

use conceal_core::labels::{LabelInput, LabelRecord};
use conceal_core::report::ReportBundle;
use conceal_core::review::{LabelHistory, Perspectives, ReviewError, ReviewStore, SamplePage, SampleQuery};
use conceal_core::sampler::StratumLabel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub error: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Review(#[from] ReviewError),
    #[error("{0}")]
    BadRequest(String),
    #[error("worker task failed: {0}")]
    Join(#[from] tokio::task::JoinError),
}

impl ApiError {
    fn status_and_kind(&self) -> (StatusCode, &'static str) {
        match self {
            ApiError::Review(ReviewError::UnknownId(_)) => (StatusCode::NOT_FOUND, "unknown_id"),
            ApiError::Review(ReviewError::InvalidEnum(_)) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_enum"),
            ApiError::Review(ReviewError::Storage(_)) => (StatusCode::INTERNAL_SERVER_ERROR, "storage"),
            ApiError::Review(ReviewError::Report(_)) => (StatusCode::INTERNAL_SERVER_ERROR, "report"),
            ApiError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            ApiError::Join(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = self.status_and_kind();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let body = ErrorBody {
            kind: kind.to_string(),
            error: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<RwLock<ReviewStore>>,
}

impl AppState {
    pub fn new(store: ReviewStore) -> AppState {
        AppState {
            store: Arc::new(RwLock::new(store)),
        }
    }

    async fn read<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&ReviewStore) -> Result<T, ReviewError> + Send + 'static,
    {
        let store = Arc::clone(&self.store);
        let out = tokio::task::spawn_blocking(move || {
            let guard = store.read().unwrap_or_else(PoisonError::into_inner);
            f(&guard)
        })
        .await?;
        Ok(out?)
    }

    /// Writes hold the lock for the whole append, so label posts are
    /// serialized through a single writer.
    async fn write<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut ReviewStore) -> Result<T, ReviewError> + Send + 'static,
    {
        let store = Arc::clone(&self.store);
        let out = tokio::task::spawn_blocking(move || {
            let mut guard = store.write().unwrap_or_else(PoisonError::into_inner);
            f(&mut guard)
        })
        .await?;
        Ok(out?)
    }
}

#[derive(Debug, Default, Deserialize)]
struct SampleParams {
    stratum: Option<String>,
    labeled: Option<bool>,
    page: Option<usize>,
    page_size: Option<usize>,
}

impl SampleParams {
    fn into_query(self) -> Result<SampleQuery, ApiError> {
        let stratum = match self.stratum.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<StratumLabel>()
                    .map_err(|e| ApiError::BadRequest(e.to_string()))?,
            ),
        };
        Ok(SampleQuery {
            stratum,
            labeled: self.labeled,
            page: self.page,
            page_size: self.page_size,
        })
    }
}

async fn list_sample(
    State(state): State<AppState>,
    params: Result<Query<SampleParams>, QueryRejection>,
) -> Result<Json<SamplePage>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let query = params.into_query()?;
    let page = state.read(move |s| Ok(s.list_sample(&query))).await?;
    Ok(Json(page))
}

async fn perspectives(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Perspectives>, ApiError> {
    Ok(Json(state.read(move |s| s.perspectives(&id)).await?))
}

async fn get_labels(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<LabelHistory>, ApiError> {
    Ok(Json(state.read(move |s| s.labels(&id)).await?))
}

async fn post_label(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<LabelInput>, JsonRejection>,
) -> Result<(StatusCode, Json<LabelRecord>), ApiError> {
    let Json(input) = body.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let stored = state.write(move |s| s.post_label(&id, input)).await?;
    Ok((StatusCode::CREATED, Json(stored)))
}

async fn stats(State(state): State<AppState>) -> Result<Json<ReportBundle>, ApiError> {
    Ok(Json(state.read(|s| s.stats()).await?))
}

async fn api_not_found() -> ApiError {
    ApiError::BadRequest("no such endpoint".to_string())
}

pub fn api_router(state: AppState) -> Router {
    Router::new()
        .route("/api/sample", get(list_sample))
        .route("/api/emails/{id}/perspectives", get(perspectives))
        .route("/api/emails/{id}/labels", get(get_labels).post(post_label))
        .route("/api/stats", get(stats))
        .route("/api/{*rest}", get(api_not_found).post(api_not_found))
        .with_state(state)
}

/// API routes plus an optional static mount for the UI bundle.
pub fn router(store: ReviewStore, static_dir: Option<PathBuf>) -> Router {
    let api = api_router(AppState::new(store));
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    };
    app.layer(TraceLayer::new_for_http())
}

pub async fn serve(listener: TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}

/// Binds `addr` and returns the bound address with the server future.
pub async fn bind(
    addr: SocketAddr,
    app: Router,
) -> std::io::Result<(SocketAddr, impl std::future::Future<Output = std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, serve(listener, app)))
}

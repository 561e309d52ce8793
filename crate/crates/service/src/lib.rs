//! HTTP API over the curve-fitting core: upload a CSV, train every model family
//! on a chosen feature/label selection, then fetch the ranked result document
//! and per-family plot data. Also serves the web front end's static files.
//!
//! | method | path                          | body / result                      |
//! |--------|-------------------------------|------------------------------------|
//! | POST   | `/api/datasets`               | CSV (raw or multipart `file`)      |
//! | POST   | `/api/train`                  | selection JSON → result document   |
//! | GET    | `/api/results/{dataset_id}`   | last result document               |
//! | GET    | `/api/plot/{dataset_id}/{family}` | plot series                    |
//! | GET    | `/api/health`                 | `{"status":"ok"}`                  |

pub mod error;
pub mod store;

use std::future::Future;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{any, get, post};
use axum::{Json, Router};
use curfit_core::{
    auto_train, build_result_document, parse_csv, plot_series, select_columns, split_dataset,
    DocumentContext, ModelFamily, PlotSeries, ResultDocument, DEFAULT_ORDER, DEFAULT_SEED,
    DEFAULT_TEST_PERCENT,
};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::services::{ServeDir, ServeFile};

pub use error::{ApiError, ErrorBody, FamilyFailure};
pub use store::{Session, SessionStore, TrainedResult};

/// Environment variable that, when set, overrides the configured port.
pub const PORT_ENV: &str = "CURFIT_PORT";
pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 32 * 1024 * 1024;
pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(60 * 60);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Directory of built front-end assets; unmatched non-API paths are served from here.
    pub static_dir: Option<PathBuf>,
    pub max_upload_bytes: usize,
    pub session_ttl: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            static_dir: None,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            session_ttl: DEFAULT_SESSION_TTL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> Self {
        Self {
            store: Arc::new(SessionStore::new(config.session_ttl)),
        }
    }
}

/// Port from `CURFIT_PORT` if set, else `fallback`.
pub fn resolve_port(fallback: u16) -> Result<u16, String> {
    match std::env::var(PORT_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| format!("{PORT_ENV}={raw:?} is not a valid port")),
        Err(_) => Ok(fallback),
    }
}

pub fn app(config: &ServiceConfig) -> Router {
    router(AppState::new(config), config)
}

pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/datasets", post(upload_dataset))
        .route("/api/train", post(train))
        .route("/api/results/{dataset_id}", get(results))
        .route("/api/plot/{dataset_id}/{family}", get(plot))
        .route("/api", any(unknown_endpoint))
        .route("/api/{*rest}", any(unknown_endpoint));

    let routed = match &config.static_dir {
        Some(dir) => api
            .fallback_service(ServeDir::new(dir).fallback(ServeFile::new(dir.join("index.html")))),
        None => api.fallback(unknown_endpoint),
    };

    routed
        .layer(DefaultBodyLimit::max(config.max_upload_bytes))
        .layer(CorsLayer::permissive())
        .layer(middleware::from_fn(log_request))
        .with_state(state)
}

/// Serves until `shutdown` resolves, sweeping idle sessions in the background.
pub async fn serve(
    listener: TcpListener,
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let state = AppState::new(&config);
    let store = Arc::clone(&state.store);
    let sweep_every = config.session_ttl.min(Duration::from_secs(60));
    let sweeper = tokio::spawn(async move {
        let mut tick = tokio::time::interval(sweep_every);
        loop {
            tick.tick().await;
            let evicted = store.evict_expired();
            if evicted > 0 {
                tracing::info!("evicted {evicted} idle dataset(s)");
            }
        }
    });
    let app = router(state, &config);
    let outcome = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    outcome
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let start = Instant::now();
    let response = next.run(req).await;
    tracing::info!(
        "{method} {path} {} {:.1}ms",
        response.status().as_u16(),
        start.elapsed().as_secs_f64() * 1e3
    );
    response
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
    })
}

async fn unknown_endpoint() -> ApiError {
    ApiError::not_found("not_found", "no such endpoint")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UploadResponse {
    pub dataset_id: String,
    pub name: String,
    pub columns: Vec<String>,
    pub rows: usize,
    pub dropped_rows: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_columns: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct UploadQuery {
    name: Option<String>,
}

fn rejection(status: StatusCode, message: String) -> ApiError {
    let code = if status == StatusCode::PAYLOAD_TOO_LARGE {
        "payload_too_large"
    } else {
        "invalid_request"
    };
    ApiError::new(status, code, message)
}

/// Body bytes plus a display name, from either a raw body or a multipart `file` part.
async fn read_upload(state: &AppState, req: Request) -> Result<(Option<String>, Bytes), ApiError> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    if !is_multipart {
        let body = Bytes::from_request(req, state)
            .await
            .map_err(|e| rejection(e.status(), e.body_text()))?;
        return Ok((None, body));
    }
    let mut form = Multipart::from_request(req, state)
        .await
        .map_err(|e| rejection(e.status(), e.body_text()))?;
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| rejection(e.status(), e.body_text()))?
    {
        if field.name() == Some("file") {
            let name = field.file_name().map(str::to_owned);
            let body = field
                .bytes()
                .await
                .map_err(|e| rejection(e.status(), e.body_text()))?;
            return Ok((name, body));
        }
    }
    Err(ApiError::new(
        StatusCode::BAD_REQUEST,
        "missing_file",
        "multipart upload has no part named `file`",
    ))
}

async fn upload_dataset(
    State(state): State<AppState>,
    Query(query): Query<UploadQuery>,
    req: Request,
) -> Result<Json<UploadResponse>, ApiError> {
    let (part_name, body) = read_upload(&state, req).await?;
    let name = query
        .name
        .or(part_name)
        .unwrap_or_else(|| "dataset.csv".to_owned());
    let dataset = tokio::task::spawn_blocking(move || parse_csv(&body))
        .await
        .map_err(internal)?
        .map_err(ApiError::upload)?;
    let response = UploadResponse {
        dataset_id: String::new(),
        name: name.clone(),
        columns: dataset.column_names().to_vec(),
        rows: dataset.n_rows(),
        dropped_rows: dataset.dropped_row_count(),
        skipped_columns: dataset.skipped_columns().to_vec(),
    };
    let dataset_id = state.store.insert(name, dataset);
    Ok(Json(UploadResponse {
        dataset_id,
        ..response
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainRequest {
    pub dataset_id: String,
    pub features: Vec<String>,
    pub label: String,
    #[serde(default = "default_test_percent")]
    pub test_percent: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_order")]
    pub order: u32,
}

fn default_test_percent() -> f64 {
    DEFAULT_TEST_PERCENT
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_order() -> u32 {
    DEFAULT_ORDER
}

fn internal(err: tokio::task::JoinError) -> ApiError {
    ApiError::new(
        StatusCode::INTERNAL_SERVER_ERROR,
        "internal",
        format!("training task failed: {err}"),
    )
}

fn unknown_dataset(id: &str) -> ApiError {
    ApiError::not_found("unknown_dataset", format!("no dataset with id `{id}`"))
}

async fn train(
    State(state): State<AppState>,
    payload: Result<Json<TrainRequest>, JsonRejection>,
) -> Result<Json<ResultDocument>, ApiError> {
    let Json(req) = payload.map_err(|e| rejection(e.status(), e.body_text()))?;
    let session = state
        .store
        .get(&req.dataset_id)
        .ok_or_else(|| unknown_dataset(&req.dataset_id))?;

    // one run per dataset at a time; the stored result is whichever finished last
    let _running = session.train_lock.lock().await;
    let dataset_id = req.dataset_id.clone();
    let dataset = Arc::clone(&session.dataset);
    let name = session.name.clone();
    let result = tokio::task::spawn_blocking(move || {
        let selection = select_columns(&dataset, &req.features, &req.label)?;
        let split = split_dataset(&dataset, &selection, req.test_percent, req.seed)?;
        let ranked = auto_train(&split, req.order)?;
        let context = DocumentContext::new(name, &dataset, &split, req.order);
        let document = build_result_document(&ranked, &context);
        Ok(TrainedResult {
            document,
            split,
            ranked,
        })
    })
    .await
    .map_err(internal)?
    .map_err(ApiError::training)?;

    let result = Arc::new(result);
    let document = result.document.clone();
    if !state.store.set_result(&dataset_id, result) {
        return Err(unknown_dataset(&dataset_id));
    }
    Ok(Json(document))
}

fn trained_result(state: &AppState, id: &str) -> Result<Arc<TrainedResult>, ApiError> {
    let session = state.store.get(id).ok_or_else(|| unknown_dataset(id))?;
    session.result.ok_or_else(|| {
        ApiError::not_found(
            "not_trained",
            format!("dataset `{id}` has not been trained yet"),
        )
    })
}

async fn results(
    State(state): State<AppState>,
    Path(dataset_id): Path<String>,
) -> Result<Json<ResultDocument>, ApiError> {
    Ok(Json(trained_result(&state, &dataset_id)?.document.clone()))
}

async fn plot(
    State(state): State<AppState>,
    Path((dataset_id, family)): Path<(String, String)>,
) -> Result<Json<PlotSeries>, ApiError> {
    let result = trained_result(&state, &dataset_id)?;
    let family = ModelFamily::from_str(&family).map_err(|_| {
        ApiError::not_found("unknown_family", format!("no model family `{family}`"))
    })?;
    let model = result
        .ranked
        .get(family)
        .and_then(|entry| entry.model())
        .ok_or_else(|| {
            ApiError::not_found(
                "family_not_fitted",
                format!("the {family} model failed to fit on this selection"),
            )
        })?;
    plot_series(model, &result.split.train)
        .map(Json)
        .map_err(ApiError::training)
}

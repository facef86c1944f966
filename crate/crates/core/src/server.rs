//! HTTP API consumed by the browser front end.
//!
//! | method | path                             | body                 |
//! |--------|----------------------------------|----------------------|
//! | GET    | `/api/health`                    | format version, stats|
//! | GET    | `/api/suggest?q=&k=`             | suggestion array     |
//! | GET    | `/api/graph/{id}?semantic_type=&mode=` | result tree    |
//! | GET    | `/api/edge/{a}/{b}/publications` | publication list     |
//! | POST   | `/api/feedback`                  | `{text, context_url}`|

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::api::{self, ApiError, FeedbackLog, FeedbackRequest};
use crate::explorer::{Explorer, ExplorerError};

#[derive(Clone, Debug)]
pub struct ApiConfig {
    pub bind_address: String,
    pub index_dir: PathBuf,
    pub cors_allowed_origin: String,
    /// Defaults to `feedback.log` inside the index directory.
    pub feedback_log: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot load index: {0}")]
    Index(#[from] ExplorerError),
    #[error("cannot open feedback log {}: {source}", path.display())]
    FeedbackLog {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid CORS origin {0:?}")]
    CorsOrigin(String),
    #[error("cannot bind {address}: {source}")]
    Bind {
        address: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server failed: {0}")]
    Serve(#[source] std::io::Error),
}

pub struct AppState {
    pub explorer: Explorer,
    pub feedback: FeedbackLog,
}

/// Everything needed before binding: the loaded index and the feedback log.
pub fn prepare(config: &ApiConfig) -> Result<AppState, ServerError> {
    let explorer = Explorer::open(&config.index_dir)?;
    let path = config
        .feedback_log
        .clone()
        .unwrap_or_else(|| config.index_dir.join("feedback.log"));
    let feedback =
        FeedbackLog::open(&path).map_err(|source| ServerError::FeedbackLog { path, source })?;
    Ok(AppState { explorer, feedback })
}

pub fn router(state: Arc<AppState>, cors_allowed_origin: &str) -> Result<Router, ServerError> {
    let origin = if cors_allowed_origin == "*" {
        AllowOrigin::any()
    } else {
        let value = HeaderValue::from_str(cors_allowed_origin)
            .map_err(|_| ServerError::CorsOrigin(cors_allowed_origin.to_string()))?;
        AllowOrigin::exact(value)
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);

    Ok(Router::new()
        .route("/api/health", get(health))
        .route("/api/suggest", get(suggest))
        .route("/api/graph/{concept_id}", get(graph))
        .route("/api/edge/{a}/{b}/publications", get(edge))
        .route("/api/feedback", post(feedback))
        .layer(cors)
        .with_state(state))
}

/// Loads the index, binds and serves until ctrl-c.
pub async fn serve(config: ApiConfig) -> Result<(), ServerError> {
    let state = Arc::new(prepare(&config)?);
    let app = router(state, &config.cors_allowed_origin)?;
    let listener = tokio::net::TcpListener::bind(&config.bind_address)
        .await
        .map_err(|source| ServerError::Bind {
            address: config.bind_address.clone(),
            source,
        })?;
    let local: Option<SocketAddr> = listener.local_addr().ok();
    log::info!(
        "listening on {}",
        local.map(|a| a.to_string()).unwrap_or(config.bind_address)
    );
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServerError::Serve)
}

fn json_ok(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn reply(result: Result<String, ApiError>) -> Response {
    match result {
        Ok(body) => json_ok(StatusCode::OK, body),
        Err(e) => {
            let status = StatusCode::from_u16(e.status()).unwrap_or(StatusCode::BAD_REQUEST);
            json_ok(status, e.body())
        }
    }
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    json_ok(StatusCode::OK, api::health_body(&state.explorer))
}

async fn suggest(
    State(state): State<Arc<AppState>>,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    reply(api::suggest_body(
        &state.explorer,
        params.get("q").map(String::as_str),
        params.get("k").map(String::as_str),
    ))
}

async fn graph(
    State(state): State<Arc<AppState>>,
    Path(concept_id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    reply(api::graph_body(
        &state.explorer,
        &concept_id,
        params.get("semantic_type").map(String::as_str),
        params.get("mode").map(String::as_str),
    ))
}

async fn edge(
    State(state): State<Arc<AppState>>,
    Path((a, b)): Path<(String, String)>,
) -> Response {
    reply(api::edge_body(&state.explorer, &a, &b))
}

async fn feedback(
    State(state): State<Arc<AppState>>,
    body: Result<Json<FeedbackRequest>, axum::extract::rejection::JsonRejection>,
) -> Response {
    let request = match body {
        Ok(Json(request)) => request,
        Err(e) => return reply(Err(ApiError::BadRequest(e.body_text()))),
    };
    if let Err(e) = request.validate() {
        return reply(Err(e));
    }
    match state.feedback.append(&request) {
        Ok(()) => json_ok(StatusCode::ACCEPTED, r#"{"status":"accepted"}"#.to_string()),
        Err(e) => {
            log::error!("feedback log write failed: {e}");
            json_ok(
                StatusCode::INTERNAL_SERVER_ERROR,
                r#"{"error":"feedback could not be recorded"}"#.to_string(),
            )
        }
    }
}

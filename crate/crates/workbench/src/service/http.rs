use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::store::{AnnotationStore, NextTask, ServiceError};
use crate::formats::parse_corpus;

pub type SharedStore = Arc<RwLock<AnnotationStore>>;

/// Header carrying the annotator id when it is not in the query or body.
pub const ANNOTATOR_HEADER: &str = "x-annotator-id";

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NoCorpus | ServiceError::UnknownTask(_) => StatusCode::NOT_FOUND,
            ServiceError::MissingAnnotator
            | ServiceError::InvalidScore(_)
            | ServiceError::IllegalDimension { .. }
            | ServiceError::UnknownDimension(_)
            | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::SessionsActive(_) => StatusCode::CONFLICT,
            ServiceError::Log { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

fn write_store(store: &SharedStore) -> std::sync::RwLockWriteGuard<'_, AnnotationStore> {
    // a panic while holding the lock leaves the log itself intact
    store.write().unwrap_or_else(|e| e.into_inner())
}

fn read_store(store: &SharedStore) -> std::sync::RwLockReadGuard<'_, AnnotationStore> {
    store.read().unwrap_or_else(|e| e.into_inner())
}

fn annotator_from(headers: &HeaderMap, explicit: Option<String>) -> Option<String> {
    explicit.filter(|a| !a.is_empty()).or_else(|| {
        headers
            .get(ANNOTATOR_HEADER)
            .and_then(|v| v.to_str().ok())
            .filter(|a| !a.is_empty())
            .map(str::to_string)
    })
}

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/corpora", get(get_corpora).post(post_corpora))
        .route("/tasks/next", get(next_task))
        .route("/scores", post(post_score))
        .route("/progress", get(progress))
        .route("/export", get(export))
        .with_state(store)
}

async fn get_corpora(State(store): State<SharedStore>) -> Response {
    let info = read_store(&store).corpus_info();
    match info {
        Some(info) => Json(json!({ "loaded": true, "corpus": info })).into_response(),
        None => Json(json!({ "loaded": false, "corpus": null })).into_response(),
    }
}

#[derive(Deserialize)]
struct CorpusQuery {
    name: Option<String>,
}

async fn post_corpora(
    State(store): State<SharedStore>,
    Query(q): Query<CorpusQuery>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let name = q.name.unwrap_or_else(|| "corpus".to_string());
    let corpus = parse_corpus(&body[..], &name).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
    let info = write_store(&store).load_corpus(corpus)?;
    Ok(Json(json!({ "loaded": true, "corpus": info })).into_response())
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: Option<String>,
}

async fn next_task(
    State(store): State<SharedStore>,
    headers: HeaderMap,
    Query(q): Query<NextQuery>,
) -> Result<Response, ServiceError> {
    let annotator = annotator_from(&headers, q.annotator).ok_or(ServiceError::MissingAnnotator)?;
    let mut store = write_store(&store);
    let body = match store.next_task(&annotator)? {
        NextTask::Task(task) => json!({ "done": false, "task": task }),
        NextTask::Done => json!({ "done": true, "session": store.session_state(&annotator) }),
    };
    Ok(Json(body).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreBody {
    task_id: String,
    dim: String,
    score: f64,
    annotator: Option<String>,
}

async fn post_score(State(store): State<SharedStore>, headers: HeaderMap, body: Bytes) -> Result<Response, ServiceError> {
    let req: ScoreBody = serde_json::from_slice(&body).map_err(|e| ServiceError::BadRequest(format!("body: {e}")))?;
    let annotator = annotator_from(&headers, req.annotator).ok_or(ServiceError::MissingAnnotator)?;
    let now = chrono::Utc::now().timestamp_millis();
    // the append ends in an fsync, which blocks
    let event = tokio::task::spawn_blocking(move || {
        write_store(&store).submit_score(&annotator, &req.task_id, &req.dim, req.score, now)
    })
    .await
    .map_err(|e| ServiceError::BadRequest(format!("submission aborted: {e}")))??;
    Ok(Json(json!({
        "ok": true,
        "annotator": event.annotator_id,
        "task_id": format!("{}:{}:{}:{}", event.text_id, event.start, event.end, event.kind),
        "dim": event.dimension.code(),
        "score": event.score,
    }))
    .into_response())
}

async fn progress(State(store): State<SharedStore>) -> Response {
    let p = read_store(&store).progress();
    Json(p).into_response()
}

async fn export(State(store): State<SharedStore>) -> Response {
    let body = read_store(&store).export_jsonl();
    ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, store: SharedStore) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

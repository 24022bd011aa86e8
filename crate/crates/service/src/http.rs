//! HTTP routes over a shared [`Store`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use densepara::coref::Strictness;
use densepara::paraphrase::{render_text, Rendering};
use densepara::{analyze, parse_corpus, write_document};
use serde::Deserialize;
use serde_json::json;

use crate::error::ServiceError;
use crate::ops::{invariant_of, EditOp, Rejection};
use crate::store::{audit_line, Store};
use crate::view::document_view;

/// Header naming the annotator; recorded in the audit log only.
pub const ACTOR_HEADER: &str = "x-actor";
const DEFAULT_ACTOR: &str = "anonymous";

#[derive(Debug, Deserialize)]
pub struct EditRequest {
    pub version: u64,
    pub ops: Vec<EditOp>,
}

#[derive(Debug, Deserialize)]
pub struct PreviewQuery {
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub transfer: bool,
    #[serde(default)]
    pub inline: bool,
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/docs", get(list_docs).post(import_docs))
        .route("/docs/{id}", get(get_doc))
        .route("/docs/{id}/edits", axum::routing::post(post_edits))
        .route("/docs/{id}/preview", get(preview))
        .route("/docs/{id}/export", get(export))
        .route("/docs/{id}/audit", get(audit))
        .with_state(store)
}

/// Serves until the process is stopped.
pub async fn serve(store: Arc<Store>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}

fn text(body: String, content_type: &'static str) -> Response {
    ([(header::CONTENT_TYPE, content_type)], body).into_response()
}

async fn list_docs(State(store): State<Arc<Store>>) -> Response {
    Json(store.list()).into_response()
}

async fn import_docs(
    State(store): State<Arc<Store>>,
    body: String,
) -> Result<Response, ServiceError> {
    let docs = parse_corpus(&body).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
    for d in &docs {
        if store.contains(&d.doc_id) {
            return Err(ServiceError::AlreadyExists(d.doc_id.clone()));
        }
    }
    let mut ids = Vec::new();
    for d in docs {
        ids.push(d.doc_id.clone());
        store.import(d)?;
    }
    Ok((StatusCode::CREATED, Json(json!({ "imported": ids }))).into_response())
}

async fn get_doc(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let snap = store.snapshot(&id)?;
    let view = document_view(&snap.doc, snap.version, &store.config().resources)?;
    Ok(Json(view).into_response())
}

async fn post_edits(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<EditRequest>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let Json(req) = body.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let actor = headers
        .get(ACTOR_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|v| !v.trim().is_empty())
        .unwrap_or(DEFAULT_ACTOR);
    let outcome = store.apply(&id, req.version, actor, req.ops)?;
    Ok(Json(outcome).into_response())
}

async fn preview(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Query(q): Query<PreviewQuery>,
) -> Result<Response, ServiceError> {
    let rendering: Rendering = match q.mode.as_deref() {
        None => Rendering::Hrp,
        Some(m) => m.parse().map_err(ServiceError::BadRequest)?,
    };
    let snap = store.snapshot(&id)?;
    let cfg = store.config();
    let an = analyze(&snap.doc, &cfg.resources, Strictness::Strict).map_err(|e| {
        ServiceError::Rejected(Rejection {
            invariant: invariant_of(&e),
            message: e.to_string(),
            op_index: None,
        })
    })?;
    let body = render_text(&an, &cfg.dp(q.transfer, q.inline), rendering);
    Ok(text(body, "text/plain; charset=utf-8"))
}

async fn export(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let snap = store.snapshot(&id)?;
    Ok(text(write_document(&snap.doc), "text/plain; charset=utf-8"))
}

async fn audit(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let body: String = store.audit(&id)?.iter().map(audit_line).collect();
    Ok(text(body, "application/x-ndjson"))
}

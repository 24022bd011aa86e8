use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

use crate::ops::Rejection;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown document `{0}`")]
    NotFound(String),

    #[error("document `{0}` already exists")]
    AlreadyExists(String),

    #[error("version conflict: expected {expected}, current is {current}")]
    Conflict { expected: u64, current: u64 },

    #[error("invariant `{}` violated: {}", .0.invariant, .0.message)]
    Rejected(Rejection),

    #[error("document id `{0}` must be non-empty ASCII letters, digits, `-` or `_`")]
    InvalidId(String),

    #[error("{0}")]
    BadRequest(String),

    #[error("{path}: {reason}")]
    Corrupt { path: String, reason: String },

    #[error("{0}")]
    Io(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::AlreadyExists(_) | ServiceError::Conflict { .. } => StatusCode::CONFLICT,
            ServiceError::Rejected(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::InvalidId(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Corrupt { .. } | ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    /// Machine-readable error code used in response bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::AlreadyExists(_) => "already_exists",
            ServiceError::Conflict { .. } => "version_conflict",
            ServiceError::Rejected(_) => "invariant_violation",
            ServiceError::InvalidId(_) | ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Corrupt { .. } | ServiceError::Io(_) => "internal",
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code(), "message": self.to_string() });
        match &self {
            ServiceError::Conflict { current, .. } => {
                body["current_version"] = json!(current);
            }
            ServiceError::Rejected(r) => {
                body["invariant"] = json!(r.invariant);
                if let Some(i) = r.op_index {
                    body["op_index"] = json!(i);
                }
            }
            _ => {}
        }
        (self.status(), Json(body)).into_response()
    }
}

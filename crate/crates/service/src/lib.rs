//! Annotation service: a versioned document store with validated edits,
//! an audit log for replay, and an HTTP API with live paraphrase previews.

pub mod error;
pub mod http;
pub mod ops;
pub mod store;
pub mod view;

pub use error::ServiceError;
pub use http::{router, serve, ACTOR_HEADER};
pub use ops::{apply_ops, validate, EditOp, Rejection};
pub use store::{replay, AuditEntry, Store};

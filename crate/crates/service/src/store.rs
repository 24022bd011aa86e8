//! Versioned document store with optional on-disk persistence and an audit log.
//!
//! On disk each document `id` owns three files: `id.base.conllu` (the imported
//! state), `id.conllu` (the current state) and `id.audit.jsonl` (one applied
//! batch per line). Replaying the log over the base yields the current state.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use densepara::config::Config;
use densepara::{parse_corpus, write_document, Document};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::ops::{apply_ops, validate, EditOp, Rejection};

/// One applied batch. `seq` equals the document version it produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub actor: String,
    pub ops: Vec<EditOp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DocSummary {
    pub id: String,
    pub title: String,
    pub version: u64,
    pub sentences: usize,
}

/// A read-only copy of one document at one version.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub doc: Document,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EditOutcome {
    pub version: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
struct Entry {
    base: Document,
    doc: Document,
    audit: Vec<AuditEntry>,
}

#[derive(Debug)]
pub struct Store {
    dir: Option<PathBuf>,
    config: Config,
    docs: RwLock<BTreeMap<String, Entry>>,
}

/// Rebuilds a document from its base and audit log.
pub fn replay(base: &Document, audit: &[AuditEntry]) -> Result<Document, Rejection> {
    let mut doc = base.clone();
    for entry in audit {
        doc = apply_ops(&doc, &entry.ops)?;
    }
    Ok(doc)
}

/// Parses an audit log; sequence numbers must run 1, 2, 3 and so on.
pub fn read_audit(text: &str) -> Result<Vec<AuditEntry>, String> {
    let mut out: Vec<AuditEntry> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: AuditEntry =
            serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        let expected = out.len() as u64 + 1;
        if entry.seq != expected {
            return Err(format!(
                "line {}: sequence {} where {expected} was expected",
                i + 1,
                entry.seq
            ));
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn audit_line(entry: &AuditEntry) -> String {
    let mut line = serde_json::to_string(entry).expect("audit entries serialize");
    line.push('\n');
    line
}

/// Ids double as file stems, so they are restricted to a safe alphabet.
fn check_id(id: &str) -> Result<(), ServiceError> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_'));
    if ok {
        Ok(())
    } else {
        Err(ServiceError::InvalidId(id.to_string()))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ServiceError {
    ServiceError::Io(format!("{}: {e}", path.display()))
}

/// Writes through a temporary file so readers never see a partial document.
fn write_atomic(path: &Path, text: &str) -> Result<(), ServiceError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn read_single(path: &Path) -> Result<Document, ServiceError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut docs = parse_corpus(&text).map_err(|e| ServiceError::Corrupt {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    if docs.len() != 1 {
        return Err(ServiceError::Corrupt {
            path: path.display().to_string(),
            reason: format!("expected one document, found {}", docs.len()),
        });
    }
    Ok(docs.remove(0))
}

impl Store {
    pub fn in_memory(config: Config) -> Store {
        Store {
            dir: None,
            config,
            docs: RwLock::new(BTreeMap::new()),
        }
    }

    /// Opens (creating if needed) a store directory and loads every document in it.
    ///
    /// Each current file must equal the replay of its base and log.
    pub fn open(dir: impl Into<PathBuf>, config: Config) -> Result<Store, ServiceError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let mut docs = BTreeMap::new();
        let listing = fs::read_dir(&dir).map_err(|e| io_err(&dir, e))?;
        let mut ids: Vec<String> = Vec::new();
        for item in listing {
            let item = item.map_err(|e| io_err(&dir, e))?;
            let name = item.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".base.conllu") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        for id in ids {
            let base = read_single(&dir.join(format!("{id}.base.conllu")))?;
            let current_path = dir.join(format!("{id}.conllu"));
            let current = read_single(&current_path)?;
            let audit_path = dir.join(format!("{id}.audit.jsonl"));
            let audit_text = match fs::read_to_string(&audit_path) {
                Ok(t) => t,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
                Err(e) => return Err(io_err(&audit_path, e)),
            };
            let corrupt = |reason: String| ServiceError::Corrupt {
                path: audit_path.display().to_string(),
                reason,
            };
            let audit = read_audit(&audit_text).map_err(corrupt)?;
            let replayed = replay(&base, &audit).map_err(|r| corrupt(r.message))?;
            if write_document(&replayed) != write_document(&current) {
                return Err(ServiceError::Corrupt {
                    path: current_path.display().to_string(),
                    reason: "current state differs from the replayed audit log".into(),
                });
            }
            docs.insert(
                id,
                Entry {
                    base,
                    doc: current,
                    audit,
                },
            );
        }
        Ok(Store {
            dir: Some(dir),
            config,
            docs: RwLock::new(docs),
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    fn path(&self, id: &str, suffix: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}{suffix}")))
    }

    /// Adds a validated document at version 0.
    pub fn import(&self, doc: Document) -> Result<(), ServiceError> {
        check_id(&doc.doc_id)?;
        validate(&doc, &self.config.resources).map_err(ServiceError::Rejected)?;
        let mut docs = self.docs.write().expect("store lock");
        if docs.contains_key(&doc.doc_id) {
            return Err(ServiceError::AlreadyExists(doc.doc_id.clone()));
        }
        let text = write_document(&doc);
        if let Some(p) = self.path(&doc.doc_id, ".base.conllu") {
            write_atomic(&p, &text)?;
        }
        if let Some(p) = self.path(&doc.doc_id, ".conllu") {
            write_atomic(&p, &text)?;
        }
        if let Some(p) = self.path(&doc.doc_id, ".audit.jsonl") {
            fs::write(&p, "").map_err(|e| io_err(&p, e))?;
        }
        docs.insert(
            doc.doc_id.clone(),
            Entry {
                base: doc.clone(),
                doc,
                audit: Vec::new(),
            },
        );
        Ok(())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.docs.read().expect("store lock").contains_key(id)
    }

    pub fn list(&self) -> Vec<DocSummary> {
        let docs = self.docs.read().expect("store lock");
        docs.values()
            .map(|e| DocSummary {
                id: e.doc.doc_id.clone(),
                title: e.doc.title.clone(),
                version: e.audit.len() as u64,
                sentences: e.doc.sentences.len(),
            })
            .collect()
    }

    pub fn snapshot(&self, id: &str) -> Result<Snapshot, ServiceError> {
        let docs = self.docs.read().expect("store lock");
        let e = docs
            .get(id)
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))?;
        Ok(Snapshot {
            doc: e.doc.clone(),
            version: e.audit.len() as u64,
        })
    }

    pub fn base(&self, id: &str) -> Result<Document, ServiceError> {
        let docs = self.docs.read().expect("store lock");
        docs.get(id)
            .map(|e| e.base.clone())
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    pub fn audit(&self, id: &str) -> Result<Vec<AuditEntry>, ServiceError> {
        let docs = self.docs.read().expect("store lock");
        docs.get(id)
            .map(|e| e.audit.clone())
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    /// Applies a batch if `expected_version` is current and the result is valid.
    pub fn apply(
        &self,
        id: &str,
        expected_version: u64,
        actor: &str,
        ops: Vec<EditOp>,
    ) -> Result<EditOutcome, ServiceError> {
        let mut docs = self.docs.write().expect("store lock");
        let entry = docs
            .get_mut(id)
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))?;
        let current = entry.audit.len() as u64;
        if expected_version != current {
            return Err(ServiceError::Conflict {
                expected: expected_version,
                current,
            });
        }
        let next = apply_ops(&entry.doc, &ops).map_err(ServiceError::Rejected)?;
        let warnings = validate(&next, &self.config.resources).map_err(ServiceError::Rejected)?;
        let record = AuditEntry {
            seq: current + 1,
            actor: actor.to_string(),
            ops,
        };
        if let Some(p) = self.path(id, ".audit.jsonl") {
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&p)
                .map_err(|e| io_err(&p, e))?;
            f.write_all(audit_line(&record).as_bytes())
                .map_err(|e| io_err(&p, e))?;
        }
        if let Some(p) = self.path(id, ".conllu") {
            write_atomic(&p, &write_document(&next))?;
        }
        entry.doc = next;
        entry.audit.push(record);
        Ok(EditOutcome {
            version: current + 1,
            warnings,
        })
    }
}

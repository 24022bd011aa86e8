//! Edit operations and the document invariants they are checked against.

use densepara::conllu::{CorefDecl, Document, EventLink, HiddenEntityDecl, SurfaceHints};
use densepara::coref::Strictness;
use densepara::types::{EntityType, HiddenKind, Relation};
use densepara::{analyze, parse_corpus, write_document, Error, Resources};
use serde::{Deserialize, Serialize};

/// One annotation edit. A batch of ops is applied atomically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EditOp {
    /// Declares a hidden entity anchored on `event`; its id is the next free `h<n>`.
    AddHidden {
        label: String,
        etype: EntityType,
        subtype: HiddenKind,
        event: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        role: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prep: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        det: Option<String>,
    },
    /// Links an explicit mention or hidden entity to an event.
    LinkRole {
        entity: String,
        relation: Relation,
        event: String,
    },
    /// Removes a link; a hidden entity left without links is removed with it.
    Unlink { entity: String, event: String },
    /// Merges the chains of two mentions (or two chain ids) into the first.
    MergeChains { first: String, second: String },
    /// Splits a declared chain before `at`; the tail gets a fresh chain id.
    SplitChain { chain: String, at: String },
    /// Sets the frame (sense) of an event head.
    SetSense { event: String, frame: String },
}

/// An op that would break a document invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// Stable invariant name.
    pub invariant: &'static str,
    pub message: String,
    /// Index of the offending op in its batch; absent when the batch as a whole fails validation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op_index: Option<usize>,
}

impl Rejection {
    fn new(invariant: &'static str, message: impl Into<String>) -> Self {
        Rejection {
            invariant,
            message: message.into(),
            op_index: None,
        }
    }
}

/// Names the invariant a core validation error stands for.
pub fn invariant_of(err: &Error) -> &'static str {
    match err {
        Error::Parse { .. } => "canonical_form",
        Error::DanglingRef { .. } => "references_resolve",
        Error::UnknownEvent { .. } => "link_targets_known_event",
        Error::MultipleResults { .. } => "single_result_per_event",
        Error::NoAntecedent { .. } => "drop_has_antecedent",
        Error::MentionInTwoChains { .. } => "mention_in_one_chain",
        Error::MixedChainTypes { .. } => "chain_single_type",
        Error::InvalidDocument { reason, .. } if reason.contains("unresolved reference") => {
            "references_resolve"
        }
        Error::InvalidDocument { reason, .. } if reason.contains("duplicate shadow") => {
            "unique_shadow_per_event"
        }
        _ => "document_valid",
    }
}

/// Checks every module invariant; returns the analysis warnings on success.
pub fn validate(doc: &Document, res: &Resources) -> Result<Vec<String>, Rejection> {
    let reject = |e: Error| Rejection::new(invariant_of(&e), e.to_string());
    doc.check_references().map_err(reject)?;
    let an = analyze(doc, res, Strictness::Strict).map_err(reject)?;
    let text = write_document(doc);
    match parse_corpus(&text) {
        Ok(parsed) if parsed.len() == 1 && &parsed[0] == doc => Ok(an.warnings().to_vec()),
        Ok(_) => Err(Rejection::new(
            "canonical_form",
            "document does not survive a write and re-read",
        )),
        Err(e) => Err(Rejection::new("canonical_form", e.to_string())),
    }
}

/// Applies a batch to a copy of `doc`; the input is untouched on rejection.
pub fn apply_ops(doc: &Document, ops: &[EditOp]) -> Result<Document, Rejection> {
    let mut out = doc.clone();
    for (i, op) in ops.iter().enumerate() {
        apply(&mut out, op).map_err(|mut r| {
            r.op_index = Some(i);
            r
        })?;
    }
    Ok(out)
}

fn field_ok(value: &str) -> bool {
    !value.contains(['|', '\n', '\r', '\t', '='])
}

fn next_id(existing: impl Iterator<Item = String>, prefix: char) -> String {
    let n = existing
        .filter_map(|id| id.strip_prefix(prefix).and_then(|d| d.parse::<u64>().ok()))
        .max()
        .unwrap_or(0);
    format!("{prefix}{}", n + 1)
}

fn event_exists(doc: &Document, event: &str) -> Result<(), Rejection> {
    let layers = doc
        .layers()
        .map_err(|e| Rejection::new(invariant_of(&e), e.to_string()))?;
    if layers.head(event).is_none() {
        return Err(Rejection::new(
            "link_targets_known_event",
            format!("unknown event `{event}`"),
        ));
    }
    Ok(())
}

fn entity_exists(doc: &Document, entity: &str) -> Result<(), Rejection> {
    let layers = doc
        .layers()
        .map_err(|e| Rejection::new(invariant_of(&e), e.to_string()))?;
    if doc.hidden(entity).is_none() && layers.mention(entity).is_none() {
        return Err(Rejection::new(
            "references_resolve",
            format!("unknown entity `{entity}`"),
        ));
    }
    Ok(())
}

fn etype_of(doc: &Document, id: &str) -> Option<EntityType> {
    if let Some(h) = doc.hidden(id) {
        return Some(h.etype);
    }
    doc.layers().ok()?.mention(id).map(|m| m.etype)
}

/// Index of the declared chain holding `key` (a chain id or a member id).
fn chain_index(doc: &Document, key: &str) -> Option<usize> {
    doc.coref_decls
        .iter()
        .position(|c| c.chain_id == key)
        .or_else(|| {
            doc.coref_decls
                .iter()
                .position(|c| c.mentions.iter().any(|m| m == key))
        })
}

fn apply(doc: &mut Document, op: &EditOp) -> Result<(), Rejection> {
    match op {
        EditOp::AddHidden {
            label,
            etype,
            subtype,
            event,
            role,
            prep,
            det,
        } => {
            let label = label.trim();
            if *subtype == HiddenKind::Shadow && label.is_empty() {
                return Err(Rejection::new(
                    "shadow_has_label",
                    "shadow entities need a label",
                ));
            }
            let hints = [
                Some(label),
                role.as_deref(),
                prep.as_deref(),
                det.as_deref(),
            ];
            if !hints.into_iter().flatten().all(field_ok) {
                return Err(Rejection::new(
                    "canonical_form",
                    "labels and hints may not contain `|`, `=`, tabs or newlines",
                ));
            }
            if !etype.is_hideable() {
                return Err(Rejection::new(
                    "hidden_type_allowed",
                    "hidden entities cannot be event heads",
                ));
            }
            event_exists(doc, event)?;
            let duplicate = doc.hidden_entities.iter().any(|h| {
                h.subtype == HiddenKind::Shadow
                    && *subtype == HiddenKind::Shadow
                    && h.anchor_event == *event
                    && h.etype == *etype
                    && h.label.eq_ignore_ascii_case(label)
            });
            if duplicate {
                return Err(Rejection::new(
                    "unique_shadow_per_event",
                    format!("`{label}` ({etype}) is already a shadow entity of `{event}`"),
                ));
            }
            let hid = next_id(doc.hidden_entities.iter().map(|h| h.hid.clone()), 'h');
            doc.hidden_entities.push(HiddenEntityDecl {
                hid,
                label: label.to_string(),
                etype: *etype,
                subtype: *subtype,
                anchor_event: event.clone(),
                hints: SurfaceHints {
                    role: role.clone(),
                    prep: prep.clone(),
                    det: det.clone(),
                },
            });
        }
        EditOp::LinkRole {
            entity,
            relation,
            event,
        } => {
            entity_exists(doc, entity)?;
            event_exists(doc, event)?;
            if let Some(h) = doc.hidden(entity) {
                if h.anchor_event != *event {
                    return Err(Rejection::new(
                        "hidden_link_matches_anchor",
                        format!(
                            "hidden entity `{entity}` is anchored on `{}`, not `{event}`",
                            h.anchor_event
                        ),
                    ));
                }
            }
            if doc
                .event_links
                .iter()
                .any(|l| l.entity == *entity && l.event == *event)
            {
                return Err(Rejection::new(
                    "link_unique",
                    format!("`{entity}` is already linked to `{event}`"),
                ));
            }
            doc.event_links.push(EventLink {
                entity: entity.clone(),
                relation: *relation,
                event: event.clone(),
            });
        }
        EditOp::Unlink { entity, event } => {
            let before = doc.event_links.len();
            doc.event_links
                .retain(|l| !(l.entity == *entity && l.event == *event));
            if doc.event_links.len() == before {
                return Err(Rejection::new(
                    "link_exists",
                    format!("`{entity}` is not linked to `{event}`"),
                ));
            }
            let orphan = doc.hidden(entity).is_some()
                && !doc.event_links.iter().any(|l| l.entity == *entity);
            if orphan {
                doc.hidden_entities.retain(|h| h.hid != *entity);
                for c in &mut doc.coref_decls {
                    c.mentions.retain(|m| m != entity);
                }
                doc.coref_decls.retain(|c| c.mentions.len() >= 2);
            }
        }
        EditOp::MergeChains { first, second } => {
            let members = |doc: &Document, key: &str| -> Result<Vec<String>, Rejection> {
                match chain_index(doc, key) {
                    Some(i) => Ok(doc.coref_decls[i].mentions.clone()),
                    None => {
                        entity_exists(doc, key)?;
                        Ok(vec![key.to_string()])
                    }
                }
            };
            let a = members(doc, first)?;
            let b = members(doc, second)?;
            if a.iter().any(|m| b.contains(m)) {
                return Err(Rejection::new(
                    "merge_distinct_chains",
                    format!("`{first}` and `{second}` are already in one chain"),
                ));
            }
            let ta = a.iter().find_map(|m| etype_of(doc, m));
            let tb = b.iter().find_map(|m| etype_of(doc, m));
            if let (Some(ta), Some(tb)) = (ta, tb) {
                if ta != tb {
                    return Err(Rejection::new(
                        "chain_single_type",
                        format!("cannot merge a {ta} chain with a {tb} chain"),
                    ));
                }
            }
            let ia = chain_index(doc, first);
            let ib = chain_index(doc, second);
            let chain_id = match ia {
                Some(i) => doc.coref_decls[i].chain_id.clone(),
                None => next_id(doc.coref_decls.iter().map(|c| c.chain_id.clone()), 'c'),
            };
            let mut mentions = a;
            mentions.extend(b);
            match ia {
                Some(i) => doc.coref_decls[i].mentions = mentions,
                None => doc.coref_decls.push(CorefDecl { chain_id, mentions }),
            }
            if let Some(j) = ib {
                doc.coref_decls.remove(j);
            }
        }
        EditOp::SplitChain { chain, at } => {
            let Some(i) = doc.coref_decls.iter().position(|c| c.chain_id == *chain) else {
                return Err(Rejection::new(
                    "references_resolve",
                    format!("unknown chain `{chain}`"),
                ));
            };
            let Some(k) = doc.coref_decls[i].mentions.iter().position(|m| m == at) else {
                return Err(Rejection::new(
                    "split_point_in_chain",
                    format!("`{at}` is not a member of `{chain}`"),
                ));
            };
            if k == 0 {
                return Err(Rejection::new(
                    "split_point_in_chain",
                    format!("splitting `{chain}` before its first member leaves it unchanged"),
                ));
            }
            let tail = doc.coref_decls[i].mentions.split_off(k);
            let chain_id = next_id(doc.coref_decls.iter().map(|c| c.chain_id.clone()), 'c');
            doc.coref_decls.push(CorefDecl {
                chain_id,
                mentions: tail,
            });
            // a declared chain needs two members; singletons stay undeclared
            doc.coref_decls.retain(|c| c.mentions.len() >= 2);
        }
        EditOp::SetSense { event, frame } => {
            let frame = frame.trim();
            if frame.is_empty() || !field_ok(frame) || frame.contains(char::is_whitespace) {
                return Err(Rejection::new(
                    "canonical_form",
                    format!("`{frame}` is not a valid frame name"),
                ));
            }
            event_exists(doc, event)?;
            let token = doc
                .sentences
                .iter_mut()
                .flat_map(|s| s.tokens.iter_mut())
                .find(|t| t.misc.get("Event") == Some(event.as_str()))
                .expect("event head exists");
            token.misc.set("Frame", frame);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use densepara::fixtures;

    fn doc(name: &str) -> Document {
        parse_corpus(fixtures::get(name).unwrap())
            .unwrap()
            .remove(0)
    }

    #[test]
    fn next_ids_skip_past_the_maximum() {
        let ids = ["h1", "h7", "x3", "h2"].map(String::from);
        assert_eq!(next_id(ids.into_iter(), 'h'), "h8");
        assert_eq!(next_id(std::iter::empty(), 'c'), "c1");
    }

    #[test]
    fn add_then_unlink_restores_the_document() {
        let base = doc("sprinkle_explicit");
        let added = apply_ops(
            &base,
            &[
                EditOp::AddHidden {
                    label: "hand".into(),
                    etype: EntityType::Tool,
                    subtype: HiddenKind::Shadow,
                    event: "ev1".into(),
                    role: None,
                    prep: None,
                    det: None,
                },
                EditOp::LinkRole {
                    entity: "h1".into(),
                    relation: Relation::ParticipantOf,
                    event: "ev1".into(),
                },
            ],
        )
        .unwrap();
        assert_eq!(added.hidden_entities.len(), 1);
        let undone = apply_ops(
            &added,
            &[EditOp::Unlink {
                entity: "h1".into(),
                event: "ev1".into(),
            }],
        )
        .unwrap();
        assert_eq!(undone, base);
    }

    #[test]
    fn rejected_batch_names_the_op() {
        let base = doc("sprinkle_explicit");
        let r = apply_ops(
            &base,
            &[
                EditOp::SetSense {
                    event: "ev1".into(),
                    frame: "CONVERT".into(),
                },
                EditOp::LinkRole {
                    entity: "m_1_3".into(),
                    relation: Relation::ParticipantOf,
                    event: "ev9".into(),
                },
            ],
        )
        .unwrap_err();
        assert_eq!(r.op_index, Some(1));
        assert_eq!(r.invariant, "link_targets_known_event");
    }

    #[test]
    fn set_sense_rewrites_the_frame() {
        let base = doc("chop_onions");
        let out = apply_ops(
            &base,
            &[EditOp::SetSense {
                event: "ev1".into(),
                frame: "AMELIORATE".into(),
            }],
        )
        .unwrap();
        assert!(write_document(&out).contains("Frame=AMELIORATE"));
        assert!(validate(&out, &Resources::default()).is_ok());
    }
}

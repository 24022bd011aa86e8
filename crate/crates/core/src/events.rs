//! Role-saturated event graphs built from entity and SRL layers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::conllu::{Document, Layers, SurfaceHints};
use crate::coref::{hidden_labels, Membership, Strictness};
use crate::error::{Error, Result};
use crate::types::{EntityType, Explicitness, Relation, Span};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub id: String,
    pub etype: EntityType,
    pub span: Option<Span>,
    pub label: String,
    pub explicitness: Explicitness,
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "SurfaceHints::is_empty")]
    pub hints: SurfaceHints,
}

impl EntityMention {
    pub fn is_hidden(&self) -> bool {
        self.explicitness.is_hidden()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub mention: EntityMention,
    pub relation: Relation,
}

impl Participant {
    /// Main ingredients carry a Theme or Patient role (or none); others are attached.
    pub fn is_main_ingredient(&self) -> bool {
        self.mention.etype == EntityType::Ingredient
            && self.relation == Relation::ParticipantOf
            && is_main_role(self.mention.role.as_deref())
    }

    pub fn is_attached_ingredient(&self) -> bool {
        self.mention.etype == EntityType::Ingredient
            && self.relation == Relation::ParticipantOf
            && !is_main_role(self.mention.role.as_deref())
    }
}

pub fn is_main_role(role: Option<&str>) -> bool {
    matches!(role, None | Some("Theme") | Some("Patient"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modifier {
    pub role: String,
    pub span: Span,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Disposition {
    Claimed,
    Unclaimed,
}

/// One SRL role span and the entities it was merged into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleAlignment {
    pub entities: Vec<String>,
    pub role: String,
    pub span: Span,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub event_id: String,
    pub head: EntityMention,
    pub lemma: String,
    pub frame: String,
    pub participants: Vec<Participant>,
    pub modifiers: Vec<Modifier>,
    pub alignments: Vec<RoleAlignment>,
    /// 1-based sentence index.
    pub sentence: usize,
}

impl Event {
    pub fn head_span(&self) -> Span {
        self.head.span.expect("event heads are explicit")
    }

    pub fn participant(&self, id: &str) -> Option<&Participant> {
        self.participants.iter().find(|p| p.mention.id == id)
    }

    /// The result-of ingredient, if any.
    pub fn result(&self) -> Option<&Participant> {
        self.participants
            .iter()
            .find(|p| p.relation == Relation::ResultOf && p.mention.etype == EntityType::Ingredient)
    }

    pub fn main_ingredients(&self) -> impl Iterator<Item = &Participant> {
        self.participants.iter().filter(|p| p.is_main_ingredient())
    }

    pub fn attached_ingredients(&self) -> impl Iterator<Item = &Participant> {
        self.participants
            .iter()
            .filter(|p| p.is_attached_ingredient())
    }

    pub fn of_type(&self, etype: EntityType) -> impl Iterator<Item = &Participant> {
        self.participants
            .iter()
            .filter(move |p| p.mention.etype == etype)
    }

    /// Destination habitat for a location change: Destination role first, else the first habitat.
    pub fn destination(&self) -> Option<&Participant> {
        let mut habitats = self.of_type(EntityType::Habitat);
        let first = habitats.next()?;
        if first.mention.role.as_deref() == Some("Destination") {
            return Some(first);
        }
        habitats
            .find(|p| p.mention.role.as_deref() == Some("Destination"))
            .or(Some(first))
    }

    pub fn has_hidden(&self) -> bool {
        self.participants.iter().any(|p| p.mention.is_hidden())
    }
}

/// Default role of a hidden entity by type and relation.
pub fn default_role(etype: EntityType, relation: Relation) -> &'static str {
    match (etype, relation) {
        (EntityType::Tool, _) => "Instrument",
        (EntityType::Habitat, _) => "Location",
        (_, Relation::ResultOf) => "Result",
        _ => "Theme",
    }
}

fn relation_for(etype: EntityType, role: &str) -> Relation {
    if etype == EntityType::Ingredient && role == "Result" {
        Relation::ResultOf
    } else {
        Relation::ParticipantOf
    }
}

fn check_single_result(event: &Event) -> Result<()> {
    let mut results = event
        .participants
        .iter()
        .filter(|p| p.relation == Relation::ResultOf && p.mention.etype == EntityType::Ingredient);
    if let (Some(a), Some(b)) = (results.next(), results.next()) {
        return Err(Error::MultipleResults {
            event: event.event_id.clone(),
            first: a.mention.id.clone(),
            second: b.mention.id.clone(),
        });
    }
    Ok(())
}

/// Builds one event per head, merging claimed role spans onto overlapping entities.
pub fn assemble_events(doc: &Document) -> Result<Vec<Event>> {
    let layers = doc.layers()?;
    assemble_with_layers(doc, &layers)
}

pub(crate) fn assemble_with_layers(doc: &Document, layers: &Layers) -> Result<Vec<Event>> {
    let mut events = Vec::with_capacity(layers.heads.len());
    let mut index: HashMap<&str, usize> = HashMap::new();
    for head in &layers.heads {
        let span = head.span;
        let mut event = Event {
            event_id: head.event_id.clone(),
            head: EntityMention {
                id: head.event_id.clone(),
                etype: EntityType::EventHead,
                span: Some(span),
                label: head.surface.clone(),
                explicitness: Explicitness::Explicit,
                role: None,
                hints: SurfaceHints::default(),
            },
            lemma: head.lemma.clone(),
            frame: head.frame.clone(),
            participants: Vec::new(),
            modifiers: Vec::new(),
            alignments: Vec::new(),
            sentence: span.sentence,
        };
        for role in layers.roles.iter().filter(|r| r.event_id == head.event_id) {
            let claimants: Vec<_> = layers
                .mentions
                .iter()
                .filter(|m| m.span.overlaps(&role.span))
                .collect();
            if claimants.is_empty() {
                let sentence = &doc.sentences[role.span.sentence - 1];
                event.modifiers.push(Modifier {
                    role: role.role.clone(),
                    span: role.span,
                    text: sentence.text(role.span.start, role.span.end),
                });
                event.alignments.push(RoleAlignment {
                    entities: Vec::new(),
                    role: role.role.clone(),
                    span: role.span,
                    disposition: Disposition::Unclaimed,
                });
                continue;
            }
            for m in &claimants {
                if event.participant(&m.id).is_none() {
                    event.participants.push(Participant {
                        mention: EntityMention {
                            id: m.id.clone(),
                            etype: m.etype,
                            span: Some(m.span),
                            label: m.text.clone(),
                            explicitness: Explicitness::Explicit,
                            role: Some(role.role.clone()),
                            hints: SurfaceHints::default(),
                        },
                        relation: relation_for(m.etype, &role.role),
                    });
                }
            }
            event.alignments.push(RoleAlignment {
                entities: claimants.iter().map(|m| m.id.clone()).collect(),
                role: role.role.clone(),
                span: role.span,
                disposition: Disposition::Claimed,
            });
        }
        index.insert(head.event_id.as_str(), events.len());
        events.push(event);
    }

    for link in &doc.event_links {
        let Some(&ei) = index.get(link.event.as_str()) else {
            return Err(Error::UnknownEvent {
                entity: link.entity.clone(),
                event: link.event.clone(),
            });
        };
        if doc.hidden(&link.entity).is_some() {
            continue;
        }
        let m = layers
            .mention(&link.entity)
            .ok_or_else(|| Error::InvalidDocument {
                doc: doc.doc_id.clone(),
                reason: format!("unresolved reference `{}`", link.entity),
            })?;
        let event = &mut events[ei];
        match event.participants.iter_mut().find(|p| p.mention.id == m.id) {
            Some(p) => p.relation = link.relation,
            None => event.participants.push(Participant {
                mention: EntityMention {
                    id: m.id.clone(),
                    etype: m.etype,
                    span: Some(m.span),
                    label: m.text.clone(),
                    explicitness: Explicitness::Explicit,
                    role: Some(default_role(m.etype, link.relation).to_string()),
                    hints: SurfaceHints::default(),
                },
                relation: link.relation,
            }),
        }
    }
    for event in &events {
        check_single_result(event)?;
    }
    for h in &doc.hidden_entities {
        if !index.contains_key(h.anchor_event.as_str()) {
            return Err(Error::UnknownEvent {
                entity: h.hid.clone(),
                event: h.anchor_event.clone(),
            });
        }
    }
    Ok(events)
}

/// Attaches hidden entities to their anchor events.
pub fn saturate_hidden(
    doc: &Document,
    events: &[Event],
    strictness: Strictness,
) -> Result<Vec<Event>> {
    let layers = doc.layers()?;
    let membership = Membership::resolve(doc, &layers, strictness)?;
    saturate_with(doc, &layers, &membership, events)
}

pub(crate) fn saturate_with(
    doc: &Document,
    layers: &Layers,
    membership: &Membership,
    events: &[Event],
) -> Result<Vec<Event>> {
    let labels = hidden_labels(doc, layers, membership)?;
    let mut out = events.to_vec();
    for link in &doc.event_links {
        let Some(decl) = doc.hidden(&link.entity) else {
            continue;
        };
        if link.event != decl.anchor_event {
            return Err(Error::InvalidDocument {
                doc: doc.doc_id.clone(),
                reason: format!(
                    "hidden entity `{}` is anchored at `{}` but linked to `{}`",
                    decl.hid, decl.anchor_event, link.event
                ),
            });
        }
        let event = out
            .iter_mut()
            .find(|e| e.event_id == link.event)
            .ok_or_else(|| Error::UnknownEvent {
                entity: link.entity.clone(),
                event: link.event.clone(),
            })?;
        if event.participant(&decl.hid).is_some() {
            return Err(Error::InvalidDocument {
                doc: doc.doc_id.clone(),
                reason: format!(
                    "hidden entity `{}` linked twice to `{}`",
                    decl.hid, link.event
                ),
            });
        }
        let role = decl
            .hints
            .role
            .clone()
            .unwrap_or_else(|| default_role(decl.etype, link.relation).to_string());
        event.participants.push(Participant {
            mention: EntityMention {
                id: decl.hid.clone(),
                etype: decl.etype,
                span: None,
                label: labels[&decl.hid].clone(),
                explicitness: decl.subtype.into(),
                role: Some(role),
                hints: decl.hints.clone(),
            },
            relation: link.relation,
        });
    }
    for event in &out {
        check_single_result(event)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_corpus;

    fn fixture(text: &str) -> Document {
        parse_corpus(text).unwrap().remove(0)
    }

    const PEAS: &str = "# newdoc id = peas\n# title = t\n# provenance = p\n\
1\tTransfer\ttransfer\tVERB\t_\t_\t0\troot\t_\tEntity=B-EVENT|Event=ev1|Frame=PUT_APPLY_PLACE_PAVE\n\
2\tpeas\tpea\tNOUN\t_\t_\t1\tobj\t_\tEntity=B-INGREDIENT|Role=ev1:B-Theme\n\
3\tto\tto\tADP\t_\t_\t5\tcase\t_\tRole=ev1:B-Destination\n\
4\tthe\tthe\tDET\t_\t_\t5\tdet\t_\tRole=ev1:I-Destination\n\
5\tsaucepan\tsaucepan\tNOUN\t_\t_\t1\tobl\t_\tEntity=B-HABITAT|Role=ev1:I-Destination\n\
6\tquickly\tquickly\tADV\t_\t_\t1\tadvmod\t_\tRole=ev1:B-Attribute|SpaceAfter=No\n\
7\t.\t.\tPUNCT\t_\t_\t1\tpunct\t_\t_\n\n";

    #[test]
    fn claimed_and_unclaimed_roles() {
        let events = assemble_events(&fixture(PEAS)).unwrap();
        assert_eq!(events.len(), 1);
        let ev = &events[0];
        assert_eq!(ev.lemma, "transfer");
        let saucepan = ev.participant("m_1_5").unwrap();
        assert_eq!(saucepan.mention.etype, EntityType::Habitat);
        assert_eq!(saucepan.mention.role.as_deref(), Some("Destination"));
        let peas = ev.participant("m_1_2").unwrap();
        assert_eq!(peas.mention.role.as_deref(), Some("Theme"));
        assert!(peas.is_main_ingredient());
        assert_eq!(ev.modifiers.len(), 1);
        assert_eq!(ev.modifiers[0].text, "quickly");
        assert_eq!(ev.modifiers[0].role, "Attribute");
    }

    #[test]
    fn bare_event() {
        let doc = fixture(
            "# newdoc id = d\n# title = t\n# provenance = p\n\
1\tStir\tstir\tVERB\t_\t_\t0\troot\t_\tEntity=B-EVENT|Event=ev1|SpaceAfter=No\n\
2\t.\t.\tPUNCT\t_\t_\t1\tpunct\t_\t_\n\n",
        );
        let events = assemble_events(&doc).unwrap();
        assert_eq!(events.len(), 1);
        assert!(events[0].participants.is_empty());
        assert!(events[0].modifiers.is_empty());
    }

    #[test]
    fn two_results_rejected() {
        let text = PEAS
            .replace("Role=ev1:B-Theme", "Role=ev1:B-Result")
            .replace("Entity=B-HABITAT", "Entity=B-INGREDIENT")
            .replace("ev1:B-Destination", "ev1:B-Result")
            .replace("ev1:I-Destination", "ev1:I-Result");
        let err = assemble_events(&fixture(&text)).unwrap_err();
        assert_eq!(
            err,
            Error::MultipleResults {
                event: "ev1".into(),
                first: "m_1_2".into(),
                second: "m_1_5".into()
            }
        );
    }
}

//! Full per-document analysis: layers, events, chains and states.

use std::collections::HashSet;

use crate::conllu::{Document, Layers};
use crate::coref::{build_chains, ChainSet, Membership, Strictness};
use crate::error::{Error, Result};
use crate::events::{assemble_with_layers, saturate_with, Event};
use crate::subevent::{transition, Inflector, SenseTable, Transition};
use crate::types::HiddenKind;

/// Lookup tables shared by every stage.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub senses: SenseTable,
    pub inflector: Inflector,
}

/// Everything derived from one document.
#[derive(Debug, Clone)]
pub struct Analysis<'d> {
    pub doc: &'d Document,
    pub layers: Layers,
    pub events: Vec<Event>,
    pub chains: ChainSet,
}

impl<'d> Analysis<'d> {
    pub fn event(&self, event_id: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.event_id == event_id)
    }

    pub fn event_position(&self, event_id: &str) -> Option<usize> {
        self.events.iter().position(|e| e.event_id == event_id)
    }

    /// Events of a 1-based sentence, by head position.
    pub fn sentence_events(&self, sentence: usize) -> Vec<&Event> {
        self.events
            .iter()
            .filter(|e| e.sentence == sentence)
            .collect()
    }

    pub fn warnings(&self) -> &[String] {
        &self.chains.warnings
    }

    /// Begin (with its `un-` marker) and end description of one participant at one event.
    pub fn transition(&self, event_id: &str, mention: &str, res: &Resources) -> Option<Transition> {
        let event = self.event(event_id)?;
        let p = event.participant(mention)?;
        let state_in = self.chains.begin(event_id, mention)?;
        let class = res.senses.classify(&event.frame);
        let habitat = event.destination().map(|h| h.mention.label.as_str());
        let mut t = transition(
            class,
            &event.lemma.to_lowercase(),
            habitat,
            state_in,
            &res.inflector,
        );
        if p.relation == crate::types::Relation::ResultOf {
            t.end = self.chains.end(event_id, mention)?.clone();
        }
        Some(t)
    }
}

/// Rejects two shadow entities with the same label and type on one event.
fn check_shadows(doc: &Document) -> Result<()> {
    let mut seen = HashSet::new();
    for h in &doc.hidden_entities {
        if h.subtype != HiddenKind::Shadow {
            continue;
        }
        let key = (h.anchor_event.as_str(), h.etype, h.label.to_lowercase());
        if !seen.insert(key) {
            return Err(Error::InvalidDocument {
                doc: doc.doc_id.clone(),
                reason: format!(
                    "duplicate shadow entity `{}` ({}) on event `{}`",
                    h.label, h.etype, h.anchor_event
                ),
            });
        }
    }
    Ok(())
}

pub fn analyze<'d>(
    doc: &'d Document,
    res: &Resources,
    strictness: Strictness,
) -> Result<Analysis<'d>> {
    let layers = doc.layers()?;
    doc.check_references()?;
    check_shadows(doc)?;
    let events = assemble_with_layers(doc, &layers)?;
    let membership = Membership::resolve(doc, &layers, strictness)?;
    let events = saturate_with(doc, &layers, &membership, &events)?;
    let chains = build_chains(doc, &events, &membership, &res.senses, &res.inflector)?;
    Ok(Analysis {
        doc,
        layers,
        events,
        chains,
    })
}

//! Coreference chains under transformation.
//!
//! Chains follow the declared `# coref:` groups; undeclared mentions form
//! singleton chains. A document-order pass over events folds the subevent
//! transitions into per-chain state timelines.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::conllu::{Document, HiddenEntityDecl, Layers};
use crate::error::{Error, Result};
use crate::events::{Event, Participant};
use crate::subevent::{
    transition, EndStateClass, EntityState, Inflector, LocationFact, SenseTable,
};
use crate::types::{EntityType, HiddenKind, Relation};

/// Drop antecedent policy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    /// Drops must be declared chain members.
    #[default]
    Strict,
    /// Unchained drops attach to the latest prior mention sharing their head noun.
    Lenient,
}

/// Document order key: (sentence, token, explicit=0/hidden=1, declaration index).
pub type Position = (usize, usize, u8, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDef {
    pub chain_id: String,
    pub etype: EntityType,
    pub declared: bool,
    /// Members in document order.
    pub members: Vec<String>,
}

/// Chain membership of every non-head mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub chains: Vec<ChainDef>,
    pub chain_of: HashMap<String, usize>,
    pub positions: HashMap<String, Position>,
    pub etypes: HashMap<String, EntityType>,
}

fn head_noun(text: &str) -> String {
    text.split_whitespace().last().unwrap_or("").to_lowercase()
}

impl Membership {
    pub fn resolve(doc: &Document, layers: &Layers, strictness: Strictness) -> Result<Membership> {
        let mut positions = HashMap::new();
        let mut etypes = HashMap::new();
        for m in &layers.mentions {
            positions.insert(m.id.clone(), (m.span.sentence, m.span.start, 0u8, 0usize));
            etypes.insert(m.id.clone(), m.etype);
        }
        for (i, h) in doc.hidden_entities.iter().enumerate() {
            let head = layers
                .head(&h.anchor_event)
                .ok_or_else(|| Error::UnknownEvent {
                    entity: h.hid.clone(),
                    event: h.anchor_event.clone(),
                })?;
            positions.insert(h.hid.clone(), (head.span.sentence, head.span.start, 1, i));
            etypes.insert(h.hid.clone(), h.etype);
        }

        let mut chains: Vec<ChainDef> = Vec::new();
        let mut chain_of: HashMap<String, usize> = HashMap::new();
        for decl in &doc.coref_decls {
            let ci = chains.len();
            let mut etype = None;
            for m in &decl.mentions {
                let t = *etypes.get(m).ok_or_else(|| Error::InvalidDocument {
                    doc: doc.doc_id.clone(),
                    reason: format!("unresolved reference `{m}`"),
                })?;
                if let Some(prev) = chain_of.get(m) {
                    return Err(Error::MentionInTwoChains {
                        mention: m.clone(),
                        first: chains[*prev].chain_id.clone(),
                        second: decl.chain_id.clone(),
                    });
                }
                match etype {
                    None => etype = Some(t),
                    Some(e) if e != t => {
                        return Err(Error::MixedChainTypes {
                            chain: decl.chain_id.clone(),
                            first: e.to_string(),
                            second: t.to_string(),
                        })
                    }
                    _ => {}
                }
                chain_of.insert(m.clone(), ci);
            }
            chains.push(ChainDef {
                chain_id: decl.chain_id.clone(),
                etype: etype.unwrap_or(EntityType::Ingredient),
                declared: true,
                members: decl.mentions.clone(),
            });
        }

        for h in &doc.hidden_entities {
            if h.subtype != HiddenKind::Drop || chain_of.contains_key(&h.hid) {
                continue;
            }
            if strictness == Strictness::Strict {
                return Err(Error::NoAntecedent {
                    entity: h.hid.clone(),
                    event: h.anchor_event.clone(),
                });
            }
            let pos = positions[&h.hid];
            let noun = head_noun(&h.label);
            let antecedent = layers
                .mentions
                .iter()
                .filter(|m| m.etype == h.etype && positions[&m.id] < pos && !noun.is_empty())
                .filter(|m| head_noun(&m.text) == noun)
                .max_by_key(|m| positions[&m.id])
                .ok_or_else(|| Error::NoAntecedent {
                    entity: h.hid.clone(),
                    event: h.anchor_event.clone(),
                })?;
            let ci = match chain_of.get(&antecedent.id) {
                Some(ci) => *ci,
                None => {
                    chains.push(ChainDef {
                        chain_id: antecedent.id.clone(),
                        etype: h.etype,
                        declared: false,
                        members: vec![antecedent.id.clone()],
                    });
                    chain_of.insert(antecedent.id.clone(), chains.len() - 1);
                    chains.len() - 1
                }
            };
            chains[ci].members.push(h.hid.clone());
            chain_of.insert(h.hid.clone(), ci);
        }

        let mut all: Vec<(&String, &Position)> = positions.iter().collect();
        all.sort_by_key(|(_, p)| **p);
        for (id, _) in all {
            if !chain_of.contains_key(id) {
                chains.push(ChainDef {
                    chain_id: id.clone(),
                    etype: etypes[id],
                    declared: false,
                    members: vec![id.clone()],
                });
                chain_of.insert(id.clone(), chains.len() - 1);
            }
        }

        for c in &mut chains {
            c.members.sort_by_key(|m| positions[m]);
        }
        let mut order: Vec<usize> = (0..chains.len()).collect();
        order.sort_by_key(|&i| positions[&chains[i].members[0]]);
        let chains: Vec<ChainDef> = order.iter().map(|&i| chains[i].clone()).collect();
        let chain_of = chains
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| c.members.iter().map(move |m| (m.clone(), ci)))
            .collect();
        Ok(Membership {
            chains,
            chain_of,
            positions,
            etypes,
        })
    }

    pub fn chain(&self, mention: &str) -> Option<&ChainDef> {
        self.chain_of.get(mention).map(|&i| &self.chains[i])
    }
}

/// Surface labels of hidden entities; drops take the latest prior chain mention's label.
pub fn hidden_labels(
    doc: &Document,
    layers: &Layers,
    membership: &Membership,
) -> Result<HashMap<String, String>> {
    let mut labels: HashMap<String, String> = HashMap::new();
    let mut hidden: Vec<&HiddenEntityDecl> = doc.hidden_entities.iter().collect();
    hidden.sort_by_key(|h| membership.positions[&h.hid]);
    for h in hidden {
        if h.subtype == HiddenKind::Shadow {
            labels.insert(h.hid.clone(), h.label.clone());
            continue;
        }
        let pos = membership.positions[&h.hid];
        let chain = membership
            .chain(&h.hid)
            .ok_or_else(|| Error::NoAntecedent {
                entity: h.hid.clone(),
                event: h.anchor_event.clone(),
            })?;
        let prior: Vec<&String> = chain
            .members
            .iter()
            .filter(|m| membership.positions[*m] < pos)
            .collect();
        let has_explicit = prior.iter().any(|m| layers.mention(m).is_some());
        let latest = prior.last();
        let label = match (has_explicit, latest) {
            (true, Some(m)) => match layers.mention(m) {
                Some(em) => em.text.clone(),
                None => labels.get(*m).cloned().unwrap_or_default(),
            },
            _ => {
                return Err(Error::NoAntecedent {
                    entity: h.hid.clone(),
                    event: h.anchor_event.clone(),
                })
            }
        };
        labels.insert(h.hid.clone(), label);
    }
    Ok(labels)
}

/// Text of the event outcome when a transformation has no annotated result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformOutcome {
    pub participle: String,
    /// End states of the transformed main inputs.
    pub inputs: Vec<EntityState>,
}

impl TransformOutcome {
    pub fn render(&self, max_states: Option<usize>) -> String {
        let cap = |s: &EntityState, k: Option<usize>| match k {
            Some(k) => crate::subevent::truncate_states(s, k).render(),
            None => s.render(),
        };
        if self.inputs.len() == 1 {
            return cap(&self.inputs[0], max_states);
        }
        let inner: Vec<EntityState> = self
            .inputs
            .iter()
            .map(|s| {
                let mut s = s.clone();
                if s.applied_states.last() == Some(&self.participle) {
                    s.applied_states.pop();
                }
                s
            })
            .collect();
        let parts: Vec<String> = inner
            .iter()
            .map(|s| cap(s, max_states.map(|k| k.saturating_sub(1))))
            .collect();
        format!("{} {}", self.participle, join_list(&parts))
    }
}

/// "a", "a and b", "a, b and c".
pub fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// States of every ingredient participant around one event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventStep {
    pub event_id: String,
    pub class: EndStateClass,
    /// Incoming (settled) state per participant id.
    pub begin: HashMap<String, EntityState>,
    /// Outgoing state per participant id.
    pub end: HashMap<String, EntityState>,
    pub outcome: Option<TransformOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    /// `None` for the initial state.
    pub event: Option<String>,
    pub state: EntityState,
    /// State re-derived from another chain (result of a merge or split).
    pub rebased: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainMention {
    pub mention: String,
    /// Anchor event for hidden mentions, first participating event otherwise.
    pub event: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefChain {
    pub chain_id: String,
    pub etype: EntityType,
    pub declared: bool,
    pub mentions: Vec<ChainMention>,
    pub timeline: Vec<Snapshot>,
}

impl CorefChain {
    /// Distinct renderings along the timeline.
    pub fn renderings(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.timeline {
            let r = s.state.render();
            if out.last() != Some(&r) {
                out.push(r);
            }
        }
        out
    }

    pub fn location_facts(&self) -> Vec<LocationFact> {
        let mut facts: Vec<LocationFact> = Vec::new();
        for s in &self.timeline {
            if let (Some(ev), Some(h)) = (&s.event, &s.state.location) {
                if facts.last().map(|f| &f.habitat) != Some(h) {
                    facts.push(LocationFact {
                        entity: self.chain_id.clone(),
                        habitat: h.clone(),
                        effective_from: ev.clone(),
                    });
                }
            }
        }
        facts
    }

    pub fn final_state(&self) -> &EntityState {
        &self
            .timeline
            .last()
            .expect("timeline has an initial state")
            .state
    }
}

/// Chains plus the per-event states they were folded from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSet {
    pub chains: Vec<CorefChain>,
    pub membership: Membership,
    pub steps: Vec<EventStep>,
    pub event_index: HashMap<String, usize>,
    pub warnings: Vec<String>,
}

fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Keeps the chain base when the mention adds no words to it.
fn refine(state: &mut EntityState, mention: &str) {
    let base = words(&state.base);
    if mention.trim().is_empty() {
        return;
    }
    if !words(mention).iter().all(|w| base.contains(w)) {
        state.base = mention.trim().to_string();
    }
}

struct Tracker<'a> {
    membership: &'a Membership,
    labels: HashMap<String, String>,
    current: HashMap<usize, EntityState>,
    timelines: Vec<Vec<Snapshot>>,
    senses: &'a SenseTable,
    inflector: &'a Inflector,
    warnings: Vec<String>,
}

impl Tracker<'_> {
    fn chain(&self, id: &str) -> usize {
        self.membership.chain_of[id]
    }

    fn state(&mut self, ci: usize) -> EntityState {
        if let Some(s) = self.current.get(&ci) {
            return s.clone();
        }
        let first = &self.membership.chains[ci].members[0];
        EntityState::new(self.labels[first].clone())
    }

    fn snapshot(&mut self, ci: usize, event: &str, state: EntityState, rebased: bool) {
        self.current.insert(ci, state.clone());
        self.timelines[ci].push(Snapshot {
            event: Some(event.to_string()),
            state,
            rebased,
        });
    }

    fn step(&mut self, event: &Event) -> EventStep {
        let class = self.senses.classify(&event.frame);
        let habitat = event.destination().map(|p| p.mention.label.clone());
        let ingredients: Vec<&Participant> = event
            .participants
            .iter()
            .filter(|p| p.mention.etype == EntityType::Ingredient)
            .collect();

        let mut begin = HashMap::new();
        for p in &ingredients {
            let ci = self.chain(&p.mention.id);
            let mut state = self.state(ci);
            if p.relation == Relation::ParticipantOf
                && p.mention.explicitness != crate::types::Explicitness::Drop
            {
                refine(&mut state, &p.mention.label);
            }
            self.current.insert(ci, state.clone());
            begin.insert(p.mention.id.clone(), state);
        }

        let mains: Vec<&Participant> = ingredients
            .iter()
            .copied()
            .filter(|p| p.is_main_ingredient())
            .collect();
        let mut main_chains: Vec<usize> = Vec::new();
        for p in &mains {
            let ci = self.chain(&p.mention.id);
            if !main_chains.contains(&ci) {
                main_chains.push(ci);
            }
        }
        let moves = class == EndStateClass::LocationChange;
        if moves && habitat.is_none() && !ingredients.is_empty() {
            self.warnings.push(format!(
                "{}: location change `{}` has no habitat; location unchanged",
                event.event_id, event.lemma
            ));
        }

        let mut outcome = None;
        let result_chain = event.result().map(|r| self.chain(&r.mention.id));
        if let Some(r) = event.result() {
            let rc = result_chain.unwrap();
            let prior = self.state(rc);
            let (mut state, rebased) = if main_chains.len() == 1 {
                let src_chain = main_chains[0];
                let src = self.state(src_chain);
                let base = match r.mention.explicitness {
                    crate::types::Explicitness::Drop => prior.base.clone(),
                    _ => r.mention.label.clone(),
                };
                let mut s = EntityState {
                    base: base.clone(),
                    applied_states: src.applied_states.clone(),
                    location: src.location.clone(),
                    pending: None,
                };
                if class == EndStateClass::Transformation && words(&base) == words(&src.base) {
                    s.apply(&self.inflector.participle(&event.lemma));
                }
                (s, src_chain != rc)
            } else {
                let base = match r.mention.explicitness {
                    crate::types::Explicitness::Drop => prior.base.clone(),
                    _ => r.mention.label.clone(),
                };
                let mut s = EntityState::new(base);
                s.location = habitat.clone();
                (s, true)
            };
            if moves {
                if let Some(h) = &habitat {
                    state.location = Some(h.clone());
                }
            }
            self.snapshot(rc, &event.event_id, state, rebased);
            if moves {
                if let Some(h) = &habitat {
                    for &ci in &main_chains {
                        if ci != rc {
                            let mut s = self.state(ci);
                            s.location = Some(h.clone());
                            self.snapshot(ci, &event.event_id, s, false);
                        }
                    }
                }
            }
        } else {
            match class {
                EndStateClass::Transformation if !main_chains.is_empty() => {
                    let mut inputs = Vec::new();
                    for &ci in &main_chains {
                        let t =
                            transition(class, &event.lemma, None, &self.state(ci), self.inflector);
                        inputs.push(t.end.clone());
                        self.snapshot(ci, &event.event_id, t.end, false);
                    }
                    outcome = Some(TransformOutcome {
                        participle: self.inflector.participle(&event.lemma),
                        inputs,
                    });
                }
                EndStateClass::LocationChange => {
                    if let Some(h) = &habitat {
                        for &ci in &main_chains {
                            let t = transition(
                                class,
                                &event.lemma,
                                Some(h),
                                &self.state(ci),
                                self.inflector,
                            );
                            self.snapshot(ci, &event.event_id, t.end, false);
                        }
                    }
                }
                _ => {}
            }
        }

        let mut end = HashMap::new();
        for p in &ingredients {
            let ci = self.chain(&p.mention.id);
            end.insert(p.mention.id.clone(), self.state(ci));
        }
        EventStep {
            event_id: event.event_id.clone(),
            class,
            begin,
            end,
            outcome,
        }
    }
}

/// Builds chains and folds the event sequence into state timelines.
pub fn build_chains(
    doc: &Document,
    events: &[Event],
    membership: &Membership,
    senses: &SenseTable,
    inflector: &Inflector,
) -> Result<ChainSet> {
    let layers = doc.layers()?;
    let labels = {
        let mut l = hidden_labels(doc, &layers, membership)?;
        for m in &layers.mentions {
            l.insert(m.id.clone(), m.text.clone());
        }
        l
    };
    let mut tracker = Tracker {
        membership,
        labels,
        current: HashMap::new(),
        timelines: vec![Vec::new(); membership.chains.len()],
        senses,
        inflector,
        warnings: Vec::new(),
    };
    for (ci, c) in membership.chains.iter().enumerate() {
        let state = EntityState::new(tracker.labels[&c.members[0]].clone());
        tracker.timelines[ci].push(Snapshot {
            event: None,
            state,
            rebased: false,
        });
    }
    let mut steps = Vec::with_capacity(events.len());
    for event in events {
        steps.push(tracker.step(event));
    }

    let mut first_event: HashMap<&str, &str> = HashMap::new();
    for event in events {
        for p in &event.participants {
            first_event
                .entry(p.mention.id.as_str())
                .or_insert(event.event_id.as_str());
        }
    }
    let chains = membership
        .chains
        .iter()
        .enumerate()
        .map(|(ci, c)| CorefChain {
            chain_id: c.chain_id.clone(),
            etype: c.etype,
            declared: c.declared,
            mentions: c
                .members
                .iter()
                .map(|m| ChainMention {
                    mention: m.clone(),
                    event: match doc.hidden(m) {
                        Some(h) => Some(h.anchor_event.clone()),
                        None => first_event.get(m.as_str()).map(|e| e.to_string()),
                    },
                })
                .collect(),
            timeline: std::mem::take(&mut tracker.timelines[ci]),
        })
        .collect();
    let event_index = events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.event_id.clone(), i))
        .collect();
    Ok(ChainSet {
        chains,
        membership: membership.clone(),
        steps,
        event_index,
        warnings: tracker.warnings,
    })
}

/// Constituents folded into a chain's entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifespanReport {
    pub chain_id: String,
    /// Events touching the chain, in document order.
    pub events: Vec<String>,
    /// Constituent labels ordered by the first mention of their chain.
    pub constituents: Vec<String>,
}

impl ChainSet {
    pub fn chain(&self, chain_id: &str) -> Option<&CorefChain> {
        self.chains.iter().find(|c| c.chain_id == chain_id)
    }

    pub fn chain_of(&self, mention: &str) -> Option<&CorefChain> {
        self.membership
            .chain_of
            .get(mention)
            .map(|&i| &self.chains[i])
    }

    pub fn step(&self, event_id: &str) -> Option<&EventStep> {
        self.event_index.get(event_id).map(|&i| &self.steps[i])
    }

    /// Incoming state of a participant at an event.
    pub fn begin(&self, event_id: &str, mention: &str) -> Option<&EntityState> {
        self.step(event_id)?.begin.get(mention)
    }

    pub fn end(&self, event_id: &str, mention: &str) -> Option<&EntityState> {
        self.step(event_id)?.end.get(mention)
    }

    /// The chain state current at a drop entity's anchor event.
    pub fn resolve_drop(&self, entity: &HiddenEntityDecl) -> Result<EntityState> {
        let no_prior = || Error::NoAntecedent {
            entity: entity.hid.clone(),
            event: entity.anchor_event.clone(),
        };
        let ci = *self
            .membership
            .chain_of
            .get(&entity.hid)
            .ok_or_else(no_prior)?;
        let pos = self.membership.positions[&entity.hid];
        let first = &self.membership.chains[ci].members[0];
        if self.membership.positions[first] >= pos {
            return Err(no_prior());
        }
        if let Some(state) = self.begin(&entity.anchor_event, &entity.hid) {
            return Ok(state.clone());
        }
        let anchor = *self
            .event_index
            .get(&entity.anchor_event)
            .ok_or_else(no_prior)?;
        let chain = &self.chains[ci];
        let mut state = chain.timeline[0].state.clone();
        for snap in &chain.timeline[1..] {
            let at = snap
                .event
                .as_ref()
                .map(|e| self.event_index[e])
                .unwrap_or(0);
            if at < anchor {
                state = snap.state.clone();
            }
        }
        Ok(state)
    }

    /// Lifespan of a chain through all events.
    pub fn lifespan(&self, chain_id: &str, events: &[Event]) -> Option<LifespanReport> {
        self.lifespan_until(chain_id, events, events.len())
    }

    /// Lifespan considering only events before index `until`.
    pub fn lifespan_until(
        &self,
        chain_id: &str,
        events: &[Event],
        until: usize,
    ) -> Option<LifespanReport> {
        let ci = self.chains.iter().position(|c| c.chain_id == chain_id)?;
        let chain = &self.chains[ci];
        let members: HashSet<&str> = chain.mentions.iter().map(|m| m.mention.as_str()).collect();
        let mut touching = Vec::new();
        // chain index -> label, keyed by the constituent chain's first position
        let mut parts: Vec<(Position, usize, String)> = Vec::new();
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut result_member_first = false;
        for (i, event) in events.iter().enumerate().take(until) {
            if !event
                .participants
                .iter()
                .any(|p| members.contains(p.mention.id.as_str()))
            {
                continue;
            }
            touching.push(event.event_id.clone());
            let Some(r) = event.result() else { continue };
            if !members.contains(r.mention.id.as_str()) {
                continue;
            }
            if chain.mentions.first().map(|m| m.mention.as_str()) == Some(r.mention.id.as_str()) {
                result_member_first = true;
            }
            for p in event.participants.iter().filter(|p| {
                p.relation == Relation::ParticipantOf && p.mention.etype == EntityType::Ingredient
            }) {
                let pc = self.membership.chain_of[&p.mention.id];
                if pc == ci || !seen.insert(pc) {
                    continue;
                }
                let label = self.steps[i]
                    .begin
                    .get(&p.mention.id)
                    .map(|s| s.render())
                    .unwrap_or_else(|| p.mention.label.clone());
                let first = &self.membership.chains[pc].members[0];
                parts.push((self.membership.positions[first], pc, label));
            }
        }
        if !result_member_first {
            let first = &self.membership.chains[ci].members[0];
            parts.push((
                self.membership.positions[first],
                ci,
                chain.timeline[0].state.render(),
            ));
        }
        parts.sort();
        Some(LifespanReport {
            chain_id: chain_id.to_string(),
            events: touching,
            constituents: parts.into_iter().map(|(_, _, l)| l).collect(),
        })
    }
}

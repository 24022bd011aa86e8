//! Template question generation over hidden entities and chain lifespans.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::coref::join_list;
use crate::events::{Event, Participant};
use crate::paraphrase::{indefinite, looks_plural, PrepositionLexicon};
use crate::pipeline::{Analysis, Resources};
use crate::types::{EntityType, Explicitness, Relation, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    /// Asks for an elided main ingredient.
    Elision,
    /// Asks for a hidden tool.
    ImplicitTool,
    /// Asks for a hidden habitat.
    ImplicitHabitat,
    /// Asks what a result is made of.
    LifespanContents,
    /// Asks how a result was obtained.
    LifespanHow,
}

pub const ALL_TYPES: [QuestionType; 5] = [
    QuestionType::Elision,
    QuestionType::ImplicitTool,
    QuestionType::ImplicitHabitat,
    QuestionType::LifespanContents,
    QuestionType::LifespanHow,
];

impl QuestionType {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Elision => "elision",
            QuestionType::ImplicitTool => "implicit_tool",
            QuestionType::ImplicitHabitat => "implicit_habitat",
            QuestionType::LifespanContents => "lifespan_contents",
            QuestionType::LifespanHow => "lifespan_how",
        }
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_TYPES
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown question type `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaItem {
    pub question: String,
    pub answer: String,
    #[serde(rename = "type")]
    pub qtype: QuestionType,
    pub doc_id: String,
    pub event_id: String,
}

#[derive(Debug, Clone)]
pub struct QgenConfig {
    pub seed: u64,
    /// Emit every adjunct variant instead of one sampled variant.
    pub enumerate_all: bool,
    pub types: Vec<QuestionType>,
    pub prepositions: PrepositionLexicon,
}

impl Default for QgenConfig {
    fn default() -> Self {
        QgenConfig {
            seed: 0,
            enumerate_all: false,
            types: ALL_TYPES.to_vec(),
            prepositions: PrepositionLexicon::default(),
        }
    }
}

/// Adjunct slots in question order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Habitat,
    Tool,
    Modifiers,
}

const SLOT_ORDER: [Slot; 3] = [Slot::Habitat, Slot::Tool, Slot::Modifiers];

fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Stable per-(seed, doc, event, template) RNG seed.
fn rng_seed(seed: u64, doc: &str, event: &str, qtype: QuestionType) -> u64 {
    let mut h = fnv1a(&seed.to_le_bytes(), 0xcbf2_9ce4_8422_2325);
    for part in [doc, event, qtype.as_str()] {
        h = fnv1a(part.as_bytes(), h);
        h = fnv1a(&[0xff], h);
    }
    h
}

/// Non-empty subsets of the present slots, by size then slot order; the empty set first.
fn variants(present: &[Slot]) -> Vec<Vec<Slot>> {
    let n = present.len();
    let mut subsets: Vec<Vec<Slot>> = (0u32..(1 << n))
        .map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| present[i])
                .collect()
        })
        .collect();
    subsets.sort_by_key(|s: &Vec<Slot>| {
        let rank: Vec<usize> = s
            .iter()
            .map(|x| SLOT_ORDER.iter().position(|y| y == x).unwrap())
            .collect();
        (s.len(), rank)
    });
    subsets
}

struct Gen<'a, 'd> {
    an: &'a Analysis<'d>,
    res: &'a Resources,
    cfg: &'a QgenConfig,
}

impl Gen<'_, '_> {
    fn sentence(&self, span: &Span) -> &Sentence {
        &self.an.doc.sentences[span.sentence - 1]
    }

    /// Whether an earlier chain member introduced the entity.
    fn given(&self, p: &Participant) -> bool {
        if p.mention.explicitness == Explicitness::Drop {
            return true;
        }
        let m = &self.an.chains.membership;
        let Some(here) = m.positions.get(&p.mention.id) else {
            return false;
        };
        m.chain(&p.mention.id)
            .is_some_and(|c| c.members.iter().any(|x| m.positions[x] < *here))
    }

    fn state(&self, event: &Event, p: &Participant) -> String {
        if p.mention.etype != EntityType::Ingredient {
            return p.mention.label.clone();
        }
        let s = if p.relation == Relation::ResultOf {
            self.an.chains.end(&event.event_id, &p.mention.id)
        } else {
            self.an.chains.begin(&event.event_id, &p.mention.id)
        };
        s.map(|s| s.render())
            .unwrap_or_else(|| p.mention.label.clone())
    }

    fn determiner(&self, p: &Participant, text: &str) -> Option<String> {
        if let Some(d) = &p.mention.hints.det {
            return (d != "-").then(|| d.clone());
        }
        if self.given(p) {
            Some("the".into())
        } else if looks_plural(text) {
            None
        } else {
            Some(indefinite(text).into())
        }
    }

    fn prep(&self, p: &Participant) -> String {
        p.mention.hints.prep.clone().unwrap_or_else(|| {
            self.cfg
                .prepositions
                .lookup(p.mention.etype, &p.mention.label)
                .prep
        })
    }

    /// Explicit adjuncts copy their role span; hidden ones get prep + article + label.
    fn adjunct(&self, event: &Event, p: &Participant) -> String {
        if !p.mention.is_hidden() {
            if let Some(a) = event
                .alignments
                .iter()
                .find(|a| a.entities.contains(&p.mention.id))
            {
                return self.span_text(event, &a.span);
            }
        }
        let text = self.state(event, p);
        match self.determiner(p, &text) {
            Some(d) => format!("{} {d} {text}", self.prep(p)),
            None => format!("{} {text}", self.prep(p)),
        }
    }

    /// Span text with participating ingredient mentions replaced by their begin state.
    fn span_text(&self, event: &Event, span: &Span) -> String {
        let sent = self.sentence(span);
        let mut out: Vec<String> = Vec::new();
        let mut i = span.start;
        while i <= span.end {
            let m = self.an.layers.mentions.iter().find(|m| {
                m.span.sentence == span.sentence && m.span.start == i && m.span.end <= span.end
            });
            match m.and_then(|m| event.participant(&m.id).map(|p| (m, p))) {
                Some((m, p)) if p.mention.etype == EntityType::Ingredient => {
                    out.push(self.state(event, p));
                    i = m.span.end + 1;
                }
                _ => {
                    out.push(sent.token(i).surface.clone());
                    i += 1;
                }
            }
        }
        out.join(" ")
    }

    fn slot_text(&self, event: &Event, slot: Slot) -> Option<String> {
        let parts: Vec<String> = match slot {
            Slot::Habitat => event
                .of_type(EntityType::Habitat)
                .map(|p| self.adjunct(event, p))
                .collect(),
            Slot::Tool => event
                .of_type(EntityType::Tool)
                .map(|p| self.adjunct(event, p))
                .collect(),
            Slot::Modifiers => event.modifiers.iter().map(|m| m.text.clone()).collect(),
        };
        (!parts.is_empty()).then(|| parts.join(" "))
    }

    /// Object phrase: "the" + begin states of the main ingredients.
    fn object(&self, event: &Event) -> Option<String> {
        let objs: Vec<String> = event
            .main_ingredients()
            .map(|p| self.state(event, p))
            .collect();
        (!objs.is_empty()).then(|| format!("the {}", join_list(&objs)))
    }

    fn questions(&self, event: &Event, qtype: QuestionType) -> Vec<(String, String)> {
        let slots_for = |allowed: &[Slot]| -> Vec<(Slot, String)> {
            allowed
                .iter()
                .filter_map(|&s| self.slot_text(event, s).map(|t| (s, t)))
                .collect()
        };
        let expand = |lead: String, allowed: &[Slot], answer: String| -> Vec<(String, String)> {
            let texts = slots_for(allowed);
            let present: Vec<Slot> = texts.iter().map(|(s, _)| *s).collect();
            variants(&present)
                .into_iter()
                .map(|v| {
                    let mut q = lead.clone();
                    for (s, t) in &texts {
                        if v.contains(s) {
                            q.push(' ');
                            q.push_str(t);
                        }
                    }
                    q.push('?');
                    (q, answer.clone())
                })
                .collect()
        };
        let lemma = event.lemma.to_lowercase();
        match qtype {
            QuestionType::Elision => {
                let mains: Vec<&Participant> = event.main_ingredients().collect();
                if !mains
                    .iter()
                    .any(|p| p.mention.explicitness == Explicitness::Drop)
                {
                    return Vec::new();
                }
                let answer = join_list(
                    &mains
                        .iter()
                        .map(|p| self.state(event, p))
                        .collect::<Vec<_>>(),
                );
                let lead = format!("What should be {}", self.res.inflector.participle(&lemma));
                expand(lead, &SLOT_ORDER, answer)
            }
            QuestionType::ImplicitTool => {
                let tools: Vec<String> = event
                    .of_type(EntityType::Tool)
                    .filter(|p| p.mention.is_hidden())
                    .map(|p| p.mention.label.clone())
                    .collect();
                if tools.is_empty() {
                    return Vec::new();
                }
                let mut lead = format!("What do you use to {lemma}");
                if let Some(o) = self.object(event) {
                    lead = format!("{lead} {o}");
                }
                expand(lead, &[Slot::Habitat, Slot::Modifiers], join_list(&tools))
            }
            QuestionType::ImplicitHabitat => {
                let habitats: Vec<String> = event
                    .of_type(EntityType::Habitat)
                    .filter(|p| p.mention.is_hidden())
                    .map(|p| format!("{} the {}", self.prep(p), p.mention.label))
                    .collect();
                if habitats.is_empty() {
                    return Vec::new();
                }
                let mut lead = format!("Where do you {lemma}");
                if let Some(o) = self.object(event) {
                    lead = format!("{lead} {o}");
                }
                expand(lead, &[Slot::Tool, Slot::Modifiers], join_list(&habitats))
            }
            QuestionType::LifespanContents => {
                let Some(r) = event.result() else {
                    return Vec::new();
                };
                let Some(chain) = self.an.chains.chain_of(&r.mention.id) else {
                    return Vec::new();
                };
                let until = self.an.event_position(&event.event_id).map_or(0, |i| i + 1);
                let Some(report) =
                    self.an
                        .chains
                        .lifespan_until(&chain.chain_id, &self.an.events, until)
                else {
                    return Vec::new();
                };
                if report.constituents.len() < 2 {
                    return Vec::new();
                }
                let q = format!("What is in the {}?", self.state(event, r));
                vec![(q, join_list(&report.constituents))]
            }
            QuestionType::LifespanHow => {
                let Some(r) = event.result() else {
                    return Vec::new();
                };
                let mut words = vec!["by".to_string(), self.res.inflector.gerund(&lemma)];
                let objs: Vec<String> = event
                    .main_ingredients()
                    .map(|p| self.state(event, p))
                    .collect();
                if !objs.is_empty() {
                    words.push(join_list(&objs));
                }
                let result_span = r.mention.span;
                let mut rest: Vec<&crate::events::RoleAlignment> = event
                    .alignments
                    .iter()
                    .filter(|a| {
                        let main = a.entities.iter().any(|id| {
                            event.participant(id).is_some_and(|p| {
                                p.is_main_ingredient() || p.relation == Relation::ResultOf
                            })
                        });
                        !main && result_span.is_none_or(|s| !s.overlaps(&a.span))
                    })
                    .collect();
                rest.sort_by_key(|a| (a.span.sentence, a.span.start));
                for a in rest {
                    words.push(self.span_text(event, &a.span));
                }
                let attached: Vec<String> = event
                    .attached_ingredients()
                    .filter(|p| p.mention.is_hidden())
                    .map(|p| self.state(event, p))
                    .collect();
                if !attached.is_empty() {
                    words.push(format!("with {}", join_list(&attached)));
                }
                let q = format!("How did you get the {}?", self.state(event, r));
                vec![(q, words.join(" "))]
            }
        }
    }
}

/// Questions for one analysed document; only events with a hidden participant qualify.
pub fn generate(an: &Analysis, res: &Resources, cfg: &QgenConfig) -> Vec<QaItem> {
    let g = Gen { an, res, cfg };
    let mut out = Vec::new();
    for event in an.events.iter().filter(|e| e.has_hidden()) {
        for &qtype in &cfg.types {
            let mut qs = g.questions(event, qtype);
            if qs.is_empty() {
                continue;
            }
            if !cfg.enumerate_all {
                let mut rng = ChaCha8Rng::seed_from_u64(rng_seed(
                    cfg.seed,
                    &an.doc.doc_id,
                    &event.event_id,
                    qtype,
                ));
                let pick = rng.gen_range(0..qs.len());
                qs = vec![qs.swap_remove(pick)];
            }
            out.extend(qs.into_iter().map(|(question, answer)| QaItem {
                question,
                answer,
                qtype,
                doc_id: an.doc.doc_id.clone(),
                event_id: event.event_id.clone(),
            }));
        }
    }
    out
}

const FUNCTION_WORDS: &[&str] = &["a", "an", "the", "and", "by", "with", "of"];

/// Answer words the document can ground: surfaces, hidden labels, inflections and prepositions.
pub fn vocabulary(an: &Analysis, res: &Resources, lexicon: &PrepositionLexicon) -> HashSet<String> {
    let mut vocab: HashSet<String> = FUNCTION_WORDS.iter().map(|s| s.to_string()).collect();
    for s in &an.doc.sentences {
        for t in &s.tokens {
            vocab.insert(t.surface.to_lowercase());
        }
    }
    for h in &an.doc.hidden_entities {
        vocab.extend(h.label.split_whitespace().map(str::to_lowercase));
        if let Some(p) = &h.hints.prep {
            vocab.insert(p.to_lowercase());
        }
        vocab.insert(lexicon.lookup(h.etype, &h.label).prep);
    }
    for e in &an.events {
        let lemma = e.lemma.to_lowercase();
        vocab.insert(res.inflector.participle(&lemma));
        vocab.insert(res.inflector.gerund(&lemma));
    }
    vocab
}

/// An item is answerable when every answer word is grounded in the document.
pub fn is_answerable(item: &QaItem, vocab: &HashSet<String>) -> bool {
    let words: Vec<String> = item
        .answer
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    !words.is_empty() && words.iter().all(|w| vocab.contains(w))
}

/// One JSON object per line.
pub fn to_jsonl(items: &[QaItem]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("items serialize"));
        out.push('\n');
    }
    out
}

/// Seq2seq lines: `question: {q} context: {recipe}<TAB>{answer}`.
pub fn to_text(items: &[QaItem], context: impl Fn(&str) -> String) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&format!(
            "question: {} context: {}\t{}\n",
            item.question,
            context(&item.doc_id),
            item.answer
        ));
    }
    out
}

/// Plain recipe text of a document, one sentence after another.
pub fn recipe_text(doc: &crate::conllu::Document) -> String {
    doc.sentences
        .iter()
        .map(Sentence::full_text)
        .collect::<Vec<_>>()
        .join(" ")
}

//! Shared proptest generators.
#![allow(dead_code)]

pub mod naive;

use densepara::conllu::{
    CorefDecl, Document, EventLink, HiddenEntityDecl, Misc, Sentence, SurfaceHints, Token,
};
use densepara::mrp::{MrpEvent, MrpKey, MrpToken, Pair};
use densepara::types::{mention_id, EntityType, HiddenKind, Relation};
use proptest::prelude::*;

pub fn word() -> impl Strategy<Value = String> {
    "[a-zà-öø-ü][a-zà-öø-ü0-9]{0,7}"
}

fn phrase(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..=max).prop_map(|w| w.join(" "))
}

const UPOS: &[&str] = &["NOUN", "VERB", "ADP", "DET", "ADJ", "PUNCT", "CCONJ", "NUM"];
const FRAMES: &[&str] = &["CUT", "COOK", "PEEL", "SPILL_POUR", "AMELIORATE", "CONVERT"];
const ROLES: &[&str] = &[
    "Patient",
    "Theme",
    "Location",
    "Instrument",
    "Destination",
    "Time",
    "Result",
];
const TYPES: [EntityType; 3] = [
    EntityType::Tool,
    EntityType::Habitat,
    EntityType::Ingredient,
];

/// Per-token layer plan: 0 none, 1 entity start, 2 event head.
#[derive(Debug, Clone)]
struct TokPlan {
    surface: String,
    lemma: String,
    upos: usize,
    head_pick: usize,
    kind: u8,
    etype: usize,
    span_len: usize,
    frame: usize,
    role: Option<(usize, usize)>,
    space_after: bool,
}

fn tok_plan() -> impl Strategy<Value = TokPlan> {
    (
        word(),
        word(),
        0..UPOS.len(),
        any::<usize>(),
        0u8..3,
        0..3usize,
        1..3usize,
        0..FRAMES.len(),
        prop::option::of((0..ROLES.len(), 1..3usize)),
        prop::bool::weighted(0.8),
    )
        .prop_map(
            |(surface, lemma, upos, head_pick, kind, etype, span_len, frame, role, space_after)| {
                TokPlan {
                    surface,
                    lemma,
                    upos,
                    head_pick,
                    kind,
                    etype,
                    span_len,
                    frame,
                    role,
                    space_after,
                }
            },
        )
}

/// (label, type index, is drop, anchor pick, linked as result, role hint, det hint)
type HiddenPlan = (
    String,
    usize,
    bool,
    usize,
    bool,
    Option<String>,
    Option<String>,
);

#[derive(Debug, Clone)]
struct DocPlan {
    doc_id: String,
    title: String,
    sentences: Vec<(usize, Vec<TokPlan>)>,
    hidden: Vec<HiddenPlan>,
    chains: Vec<Vec<usize>>,
}

fn doc_plan() -> impl Strategy<Value = DocPlan> {
    (
        "[a-z][a-z0-9-]{0,10}",
        prop::option::of(phrase(3)),
        prop::collection::vec(
            (any::<usize>(), prop::collection::vec(tok_plan(), 1..8)),
            0..4,
        ),
        prop::collection::vec(
            (
                phrase(2),
                0..3usize,
                any::<bool>(),
                any::<usize>(),
                any::<bool>(),
                prop::option::of(prop::sample::select(vec![
                    "Co-Theme".to_string(),
                    "Destination".to_string(),
                ])),
                prop::option::of(prop::sample::select(vec![
                    "the".to_string(),
                    "a".to_string(),
                    "-".to_string(),
                ])),
            ),
            0..4,
        ),
        prop::collection::vec(prop::collection::vec(any::<usize>(), 1..4), 0..3),
    )
        .prop_map(|(doc_id, title, sentences, hidden, chains)| DocPlan {
            doc_id,
            title: title.unwrap_or_default(),
            sentences,
            hidden,
            chains,
        })
}

fn build(plan: DocPlan) -> Document {
    let mut doc = Document::new(&plan.doc_id);
    doc.title = plan.title;
    doc.provenance = format!("generated:{}", plan.doc_id);
    let mut events: Vec<String> = Vec::new();
    let mut mentions: Vec<String> = Vec::new();
    for (si, (root_pick, toks)) in plan.sentences.iter().enumerate() {
        let n = toks.len();
        let root = root_pick % n + 1;
        let mut tokens: Vec<Token> = Vec::new();
        let mut ent_left = 0usize;
        let mut ent_type = EntityType::Tool;
        let mut sentence_events: Vec<String> = Vec::new();
        let mut role_left: Vec<(String, String, usize)> = Vec::new();
        for (i, p) in toks.iter().enumerate() {
            let idx = i + 1;
            let head = if idx == root {
                0
            } else {
                let others: Vec<usize> = (1..=n).filter(|&h| h != idx).collect();
                others[p.head_pick % others.len()]
            };
            let mut t = Token::new(
                idx,
                &p.surface,
                &p.lemma,
                UPOS[p.upos],
                head,
                if head == 0 { "root" } else { "dep" },
            );
            let mut misc = Misc::default();
            if ent_left > 0 {
                misc.set("Entity", format!("I-{ent_type}"));
                ent_left -= 1;
            } else if p.kind == 1 {
                ent_type = TYPES[p.etype];
                misc.set("Entity", format!("B-{ent_type}"));
                mentions.push(mention_id(si + 1, idx));
                ent_left = (p.span_len - 1).min(n - idx);
            } else if p.kind == 2 {
                let ev = format!("ev{}", events.len() + 1);
                misc.set("Entity", "B-EVENT");
                misc.set("Event", ev.clone());
                misc.set("Frame", FRAMES[p.frame]);
                events.push(ev.clone());
                sentence_events.push(ev);
            }
            // continue open roles, then maybe open one for the latest event of this sentence
            let mut items: Vec<String> = Vec::new();
            role_left.retain_mut(|(ev, role, left)| {
                if *left == 0 {
                    return false;
                }
                items.push(format!("{ev}:I-{role}"));
                *left -= 1;
                true
            });
            if let (Some((r, len)), Some(ev)) = (p.role, sentence_events.last()) {
                if !role_left.iter().any(|(e, _, _)| e == ev)
                    && !items.iter().any(|x| x.starts_with(&format!("{ev}:")))
                {
                    items.push(format!("{ev}:B-{}", ROLES[r]));
                    role_left.push((ev.clone(), ROLES[r].to_string(), len - 1));
                }
            }
            if !items.is_empty() {
                misc.set("Role", items.join(","));
            }
            if !p.space_after {
                misc.set("SpaceAfter", "No");
            }
            t.misc = misc;
            tokens.push(t);
        }
        let text: String = tokens
            .iter()
            .map(|t| t.surface.clone())
            .collect::<Vec<_>>()
            .join(" ");
        doc.sentences.push(Sentence {
            tokens,
            comments: vec![
                format!("# sent_id = {}-{}", plan.doc_id, si + 1),
                format!("# text = {text}"),
            ],
        });
    }
    if !events.is_empty() {
        for (k, (label, ty, drop, ev_pick, result, role, det)) in
            plan.hidden.into_iter().enumerate()
        {
            let hid = format!("h{}", k + 1);
            let event = events[ev_pick % events.len()].clone();
            doc.hidden_entities.push(HiddenEntityDecl {
                hid: hid.clone(),
                label,
                etype: TYPES[ty],
                subtype: if drop {
                    HiddenKind::Drop
                } else {
                    HiddenKind::Shadow
                },
                anchor_event: event.clone(),
                hints: SurfaceHints {
                    role,
                    prep: None,
                    det,
                },
            });
            doc.event_links.push(EventLink {
                entity: hid.clone(),
                relation: if result {
                    Relation::ResultOf
                } else {
                    Relation::ParticipantOf
                },
                event,
            });
            mentions.push(hid);
        }
    }
    // disjoint chains over the available entity ids
    let mut free = mentions;
    for (ci, picks) in plan.chains.into_iter().enumerate() {
        let mut members = Vec::new();
        for p in picks {
            if free.is_empty() {
                break;
            }
            members.push(free.remove(p % free.len()));
        }
        if !members.is_empty() {
            doc.coref_decls.push(CorefDecl {
                chain_id: format!("c{}", ci + 1),
                mentions: members,
            });
        }
    }
    doc
}

/// Structurally valid documents: every reference resolves and the parser accepts the text.
pub fn document() -> impl Strategy<Value = Document> {
    doc_plan().prop_map(build)
}

/// Corpora with distinct document ids.
pub fn corpus() -> impl Strategy<Value = Vec<Document>> {
    prop::collection::vec(document(), 0..4).prop_map(|mut docs| {
        for (i, d) in docs.iter_mut().enumerate() {
            d.doc_id = format!("{}-{i}", d.doc_id);
        }
        docs
    })
}

// ---------------------------------------------------------------- MRP

const PRE_KEYS: [MrpKey; 7] = [
    MrpKey::Tool,
    MrpKey::Habitat,
    MrpKey::IngrePart,
    MrpKey::IngreResult,
    MrpKey::ObjectPart,
    MrpKey::ObjectResult,
    MrpKey::Outcome,
];
const REL_KEYS: [MrpKey; 5] = [
    MrpKey::IngreOf,
    MrpKey::ResultOf,
    MrpKey::ObjectOf,
    MrpKey::ToolOf,
    MrpKey::HabitatOf,
];

fn pre_pairs() -> impl Strategy<Value = Vec<Pair>> {
    prop::collection::vec((prop::sample::select(PRE_KEYS.to_vec()), phrase(3)), 1..4)
}

/// (words, inline relational keys after the last word) segments of one event body.
fn body() -> impl Strategy<Value = Vec<(Vec<String>, Vec<MrpKey>, Option<&'static str>)>> {
    prop::collection::vec(
        (
            prop::collection::vec(word(), 1..4),
            prop::collection::vec(prop::sample::select(REL_KEYS.to_vec()), 0..3),
            prop::option::of(prop::sample::select(vec![".", ",", ";"])),
        ),
        0..4,
    )
}

/// One event whose head carries a pre-block or at least one inline tag.
pub fn mrp_event_with_head(head: String) -> impl Strategy<Value = MrpEvent> {
    (prop::option::of(pre_pairs()), body()).prop_filter_map(
        "event needs a pair",
        move |(pre, segments)| {
            let value = head.to_lowercase();
            let mut tokens = vec![MrpToken::Word(head.clone())];
            let pre_block = pre.unwrap_or_default();
            if !pre_block.is_empty() {
                tokens.push(MrpToken::Block(pre_block.clone()));
            }
            let mut inline = Vec::new();
            for (words, keys, punct) in segments {
                for w in words {
                    if w.to_lowercase() == value {
                        continue;
                    }
                    tokens.push(MrpToken::Word(w));
                }
                if !keys.is_empty() {
                    let pairs: Vec<Pair> = keys.into_iter().map(|k| (k, value.clone())).collect();
                    inline.extend(pairs.clone());
                    tokens.push(MrpToken::Block(pairs));
                }
                if let Some(p) = punct {
                    tokens.push(MrpToken::Word(p.to_string()));
                }
            }
            if pre_block.is_empty() && inline.is_empty() {
                return None;
            }
            Some(MrpEvent {
                head: head.clone(),
                pre_block,
                inline_tags: inline,
                tokens,
            })
        },
    )
}

pub fn mrp_event() -> impl Strategy<Value = MrpEvent> {
    word().prop_flat_map(mrp_event_with_head)
}

/// Several events with distinct heads that no body word repeats.
pub fn mrp_events() -> impl Strategy<Value = Vec<MrpEvent>> {
    prop::collection::btree_set("[a-z]{3,6}", 1..4).prop_flat_map(|heads| {
        let heads: Vec<String> = heads.into_iter().map(|h| format!("q{h}")).collect();
        heads
            .into_iter()
            .map(mrp_event_with_head)
            .collect::<Vec<_>>()
    })
}

// ---------------------------------------------------------------- analysable recipes

const VERBS: &[(&str, &str)] = &[
    ("chop", "CUT"),
    ("peel", "PEEL"),
    ("bake", "COOK"),
    ("pour", "SPILL_POUR"),
    ("place", "PUT_APPLY_PLACE_PAVE"),
    ("improve", "AMELIORATE"),
    ("mix", "COMBINE_MIX_UNITE"),
    ("sauté", "COOK"),
];
const NOUNS: &[&str] = &["onions", "garlic", "apple wedges", "dough", "sauce"];
const TOOLS: &[&str] = &["knife", "spatula", "whisk", "peeler"];
const HABITATS: &[&str] = &["pan", "bowl", "oven", "cutting board", "saucepan"];

#[derive(Debug, Clone)]
pub struct StepPlan {
    verb: usize,
    explicit_object: bool,
    noun: usize,
    explicit_habitat: Option<usize>,
    hidden_tool: Option<usize>,
    hidden_habitat: Option<usize>,
    result: Option<(usize, bool)>,
}

fn step_plan() -> impl Strategy<Value = StepPlan> {
    (
        0..VERBS.len(),
        any::<bool>(),
        0..NOUNS.len(),
        prop::option::of(0..HABITATS.len()),
        prop::option::of(0..TOOLS.len()),
        prop::option::of(0..HABITATS.len()),
        prop::option::weighted(0.25, (0..NOUNS.len(), any::<bool>())),
    )
        .prop_map(
            |(
                verb,
                explicit_object,
                noun,
                explicit_habitat,
                hidden_tool,
                hidden_habitat,
                result,
            )| StepPlan {
                verb,
                explicit_object,
                noun,
                explicit_habitat,
                hidden_tool,
                hidden_habitat,
                result,
            },
        )
}

fn tok(idx: usize, surface: &str, upos: &str, head: usize, misc: &[(&str, String)]) -> Token {
    let mut t = Token::new(
        idx,
        surface,
        &surface.to_lowercase(),
        upos,
        head,
        if head == 0 { "root" } else { "dep" },
    );
    for (k, v) in misc {
        t.misc.set(k, v.clone());
    }
    t
}

/// One-event-per-sentence recipes whose objects form one chain; drops always have an antecedent.
pub fn recipe() -> impl Strategy<Value = Document> {
    prop::collection::vec(step_plan(), 1..6).prop_map(|steps| {
        let mut doc = Document::new("recipe");
        doc.title = "Generated".into();
        doc.provenance = "generated".into();
        let mut chain: Vec<String> = Vec::new();
        let mut hidden_n = 0usize;
        let mut next_hid = || {
            hidden_n += 1;
            format!("h{hidden_n}")
        };
        for (si, st) in steps.iter().enumerate() {
            let s = si + 1;
            let ev = format!("ev{s}");
            let (verb, frame) = VERBS[st.verb];
            let mut v = verb.to_string();
            v[..1].make_ascii_uppercase();
            let mut tokens = vec![tok(
                1,
                &v,
                "VERB",
                0,
                &[
                    ("Entity", "B-EVENT".into()),
                    ("Event", ev.clone()),
                    ("Frame", frame.into()),
                ],
            )];
            let explicit = st.explicit_object || si == 0;
            if explicit {
                let words: Vec<&str> = NOUNS[st.noun].split(' ').collect();
                for (k, w) in words.iter().enumerate() {
                    let idx = tokens.len() + 1;
                    let b = if k == 0 { "B" } else { "I" };
                    tokens.push(tok(
                        idx,
                        w,
                        "NOUN",
                        1,
                        &[
                            ("Entity", format!("{b}-INGREDIENT")),
                            ("Role", format!("{ev}:{b}-Patient")),
                        ],
                    ));
                }
                chain.push(mention_id(s, 2));
            } else {
                let hid = next_hid();
                doc.hidden_entities.push(HiddenEntityDecl {
                    hid: hid.clone(),
                    label: String::new(),
                    etype: EntityType::Ingredient,
                    subtype: HiddenKind::Drop,
                    anchor_event: ev.clone(),
                    hints: SurfaceHints::default(),
                });
                doc.event_links.push(EventLink {
                    entity: hid.clone(),
                    relation: Relation::ParticipantOf,
                    event: ev.clone(),
                });
                chain.push(hid);
            }
            if let Some(h) = st.explicit_habitat {
                let idx = tokens.len() + 1;
                tokens.push(tok(
                    idx,
                    "in",
                    "ADP",
                    idx + 1,
                    &[("Role", format!("{ev}:B-Location"))],
                ));
                let words: Vec<&str> = HABITATS[h].split(' ').collect();
                for (k, w) in words.iter().enumerate() {
                    let idx = tokens.len() + 1;
                    let b = if k == 0 { "B" } else { "I" };
                    tokens.push(tok(
                        idx,
                        w,
                        "NOUN",
                        1,
                        &[
                            ("Entity", format!("{b}-HABITAT")),
                            ("Role", format!("{ev}:I-Location")),
                        ],
                    ));
                }
            }
            let last = tokens.len();
            tokens[last - 1].misc.set("SpaceAfter", "No");
            tokens.push(tok(last + 1, ".", "PUNCT", 1, &[]));
            let mut add_hidden =
                |label: &str, etype: EntityType, relation: Relation, doc: &mut Document| {
                    let hid = next_hid();
                    doc.hidden_entities.push(HiddenEntityDecl {
                        hid: hid.clone(),
                        label: label.into(),
                        etype,
                        subtype: HiddenKind::Shadow,
                        anchor_event: ev.clone(),
                        hints: SurfaceHints::default(),
                    });
                    doc.event_links.push(EventLink {
                        entity: hid.clone(),
                        relation,
                        event: ev.clone(),
                    });
                    hid
                };
            if let Some(t) = st.hidden_tool {
                add_hidden(
                    TOOLS[t],
                    EntityType::Tool,
                    Relation::ParticipantOf,
                    &mut doc,
                );
            }
            if let (Some(h), None) = (st.hidden_habitat, st.explicit_habitat) {
                add_hidden(
                    HABITATS[h],
                    EntityType::Habitat,
                    Relation::ParticipantOf,
                    &mut doc,
                );
            }
            if let Some((n, same_chain)) = st.result {
                let hid = add_hidden(
                    &format!("{} mixture", NOUNS[n]),
                    EntityType::Ingredient,
                    Relation::ResultOf,
                    &mut doc,
                );
                if same_chain {
                    chain.push(hid);
                }
            }
            doc.sentences.push(Sentence {
                tokens,
                comments: vec![format!("# sent_id = recipe-{s}")],
            });
        }
        doc.coref_decls.push(CorefDecl {
            chain_id: "c1".into(),
            mentions: chain,
        });
        doc
    })
}

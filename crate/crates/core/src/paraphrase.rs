//! Human- and machine-readable dense paraphrases.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::conllu::{ExplicitMention, Sentence};
use crate::coref::join_list;
use crate::error::{Error, Result};
use crate::events::{Event, Participant};
use crate::mrp::{clean_value, render_tokens, MrpEvent, MrpKey, MrpToken, Pair};
use crate::pipeline::Analysis;
use crate::subevent::{read_tsv, truncate_states, EntityState};
use crate::types::{EntityType, Explicitness, Relation, Span};

const DEFAULT_PREPOSITIONS: &str = include_str!("../data/prepositions.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Before the head, as in "Using peeler, peel apples".
    Front,
    /// After the clause.
    Trail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepEntry {
    pub prep: String,
    pub position: Placement,
}

/// Preposition lexicon keyed by entity label or head noun, with per-type defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepositionLexicon {
    by_head: HashMap<String, PrepEntry>,
    defaults: HashMap<EntityType, PrepEntry>,
}

impl Default for PrepositionLexicon {
    fn default() -> Self {
        PrepositionLexicon::from_tsv(DEFAULT_PREPOSITIONS, "prepositions.tsv")
            .expect("embedded lexicon is valid")
    }
}

impl PrepositionLexicon {
    pub fn from_tsv(text: &str, source: &str) -> Result<Self> {
        let mut by_head = HashMap::new();
        let mut defaults = HashMap::new();
        for (line, cols) in read_tsv(text, source, 3)? {
            let position = match cols[2] {
                "front" => Placement::Front,
                "trail" => Placement::Trail,
                other => {
                    return Err(Error::Table {
                        source_name: source.to_string(),
                        line,
                        reason: format!("unknown position `{other}`"),
                    })
                }
            };
            let entry = PrepEntry {
                prep: cols[1].to_string(),
                position,
            };
            match cols[0].strip_prefix('*') {
                Some(t) => {
                    let etype: EntityType = t.parse().map_err(|reason| Error::Table {
                        source_name: source.to_string(),
                        line,
                        reason,
                    })?;
                    defaults.insert(etype, entry);
                }
                None => {
                    by_head.insert(cols[0].to_lowercase(), entry);
                }
            }
        }
        Ok(PrepositionLexicon { by_head, defaults })
    }

    pub fn lookup(&self, etype: EntityType, label: &str) -> PrepEntry {
        let label = label.trim().to_lowercase();
        let head = label.split_whitespace().last().unwrap_or("").to_string();
        if let Some(e) = self.by_head.get(&label).or_else(|| self.by_head.get(&head)) {
            return e.clone();
        }
        if let Some(e) = self.defaults.get(&etype) {
            return e.clone();
        }
        match etype {
            EntityType::Tool => PrepEntry {
                prep: "with".into(),
                position: Placement::Front,
            },
            EntityType::Habitat => PrepEntry {
                prep: "in".into(),
                position: Placement::Trail,
            },
            _ => PrepEntry {
                prep: "with".into(),
                position: Placement::Trail,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DpMode {
    #[default]
    Cooking,
    Transfer,
}

/// Article policy for hidden noun phrases without a `det` hint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArticlePolicy {
    #[default]
    Bare,
    /// "the" for entities mentioned earlier, "a"/"an" otherwise.
    Contextual,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeStyle {
    /// ", resulting in X"
    #[default]
    ResultingIn,
    /// " to get X"
    ToGet,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjunctPlacement {
    /// Tools and front-class habitats before the head.
    #[default]
    Lexicon,
    /// Every hidden adjunct after the clause.
    Trailing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpConfig {
    pub mode: DpMode,
    /// `None` keeps every state.
    pub max_end_states: Option<usize>,
    pub prepositions: PrepositionLexicon,
    pub articles: ArticlePolicy,
    pub outcome: OutcomeStyle,
    pub placement: AdjunctPlacement,
    /// Maximum sentences per MRP window.
    pub window_sentences: usize,
    /// Optional character budget per MRP window.
    pub window_chars: Option<usize>,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            mode: DpMode::Cooking,
            max_end_states: None,
            prepositions: PrepositionLexicon::default(),
            articles: ArticlePolicy::Bare,
            outcome: OutcomeStyle::ResultingIn,
            placement: AdjunctPlacement::Lexicon,
            window_sentences: 3,
            window_chars: None,
        }
    }
}

impl DpConfig {
    /// General-domain mode: object keys and at most two end states.
    pub fn transfer() -> Self {
        DpConfig {
            mode: DpMode::Transfer,
            max_end_states: Some(2),
            ..Default::default()
        }
    }

    /// Trailing adjuncts with articles and "to get" outcomes.
    pub fn inline() -> Self {
        DpConfig {
            articles: ArticlePolicy::Contextual,
            outcome: OutcomeStyle::ToGet,
            placement: AdjunctPlacement::Trailing,
            ..Default::default()
        }
    }

    /// State cap in force; transfer mode never exceeds two.
    pub fn effective_max(&self) -> Option<usize> {
        match self.mode {
            DpMode::Transfer => Some(self.max_end_states.map_or(2, |k| k.min(2))),
            DpMode::Cooking => self.max_end_states,
        }
    }

    pub fn key(&self, key: MrpKey) -> MrpKey {
        match self.mode {
            DpMode::Transfer => key.to_transfer(),
            DpMode::Cooking => key,
        }
    }
}

/// Indefinite article agreeing with the following word.
pub fn indefinite(word: &str) -> &'static str {
    match word.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// Rough plural test on the last word: `-s` but not `-ss`.
pub(crate) fn looks_plural(phrase: &str) -> bool {
    let last = phrase.rsplit(' ').next().unwrap_or("").to_lowercase();
    last.len() > 2 && last.ends_with('s') && !last.ends_with("ss")
}

fn lowercase_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// Text fragment with detokenization hints.
#[derive(Debug, Clone)]
struct Piece {
    text: String,
    /// No space before (closing punctuation).
    attach: bool,
    space_after: bool,
    first_token: Option<usize>,
}

impl Piece {
    fn word(text: impl Into<String>) -> Self {
        Piece {
            text: text.into(),
            attach: false,
            space_after: true,
            first_token: None,
        }
    }
}

/// Appends a free word, forcing a space after the previous piece.
fn push_word(pieces: &mut Vec<Piece>, text: String) {
    if let Some(last) = pieces.last_mut() {
        last.space_after = true;
    }
    pieces.push(Piece::word(text));
}

fn join_pieces(pieces: &[Piece]) -> String {
    let mut out = String::new();
    let mut space = false;
    for p in pieces {
        if p.text.is_empty() {
            continue;
        }
        if !out.is_empty() && space && !p.attach {
            out.push(' ');
        }
        out.push_str(&p.text);
        space = p.space_after;
    }
    out
}

fn token_piece(sentence: &Sentence, i: usize) -> Piece {
    let tok = sentence.token(i);
    Piece {
        text: tok.surface.clone(),
        attach: tok.is_punct() && !matches!(tok.surface.as_str(), "(" | "[" | "\"" | "'"),
        space_after: tok.space_after(),
        first_token: Some(i),
    }
}

/// Token range of one event's clause plus the glue tokens after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub event: usize,
    pub start: usize,
    pub end: usize,
    pub glue: Vec<usize>,
}

/// Splits a sentence into one clause per event, cut at the next event head.
pub fn clauses(an: &Analysis, sentence: usize) -> Vec<Clause> {
    let sent = &an.doc.sentences[sentence - 1];
    let events: Vec<usize> = (0..an.events.len())
        .filter(|&i| an.events[i].sentence == sentence)
        .collect();
    let n = sent.tokens.len();
    let mut out = Vec::new();
    for (k, &ei) in events.iter().enumerate() {
        let start = if k == 0 {
            1
        } else {
            an.events[ei].head_span().start
        };
        let mut end = match events.get(k + 1) {
            Some(&next) => an.events[next].head_span().start - 1,
            None => n,
        };
        let head_end = an.events[ei].head_span().end;
        let mut glue = Vec::new();
        while end > head_end {
            let tok = sent.token(end);
            if tok.upos == "PUNCT" || tok.upos == "CCONJ" {
                glue.push(end);
                end -= 1;
            } else {
                break;
            }
        }
        glue.reverse();
        out.push(Clause {
            event: ei,
            start,
            end,
            glue,
        });
    }
    out
}

struct Ctx<'a, 'd> {
    an: &'a Analysis<'d>,
    cfg: &'a DpConfig,
}

impl Ctx<'_, '_> {
    fn cap(&self, s: &EntityState) -> String {
        match self.cfg.effective_max() {
            Some(k) => truncate_states(s, k).render(),
            None => s.render(),
        }
    }

    /// Rendering of a participant: begin state, or end state for results.
    fn render(&self, event: &Event, p: &Participant) -> String {
        if p.mention.etype != EntityType::Ingredient {
            return p.mention.label.clone();
        }
        let state = if p.relation == Relation::ResultOf {
            self.an.chains.end(&event.event_id, &p.mention.id)
        } else {
            self.an.chains.begin(&event.event_id, &p.mention.id)
        };
        state
            .map(|s| self.cap(s))
            .unwrap_or_else(|| p.mention.label.clone())
    }

    /// Whether the entity's chain was mentioned before this event.
    fn given(&self, event: &Event, mention: &str) -> bool {
        if let Some(p) = event.participant(mention) {
            if p.mention.explicitness == Explicitness::Drop {
                return true;
            }
        }
        let m = &self.an.chains.membership;
        let head = event.head_span();
        let here = (head.sentence, head.start, 0u8, 0usize);
        m.chain(mention)
            .map(|c| c.members.iter().any(|x| m.positions[x] < here))
            .unwrap_or(false)
    }

    fn article(&self, event: &Event, p: &Participant, text: &str) -> Option<String> {
        if let Some(d) = &p.mention.hints.det {
            return (d != "-").then(|| d.clone());
        }
        // explicit text is copied as annotated, without a new determiner
        if p.mention.explicitness == Explicitness::Explicit {
            return None;
        }
        match self.cfg.articles {
            ArticlePolicy::Bare => None,
            ArticlePolicy::Contextual if self.given(event, &p.mention.id) => {
                Some("the".to_string())
            }
            ArticlePolicy::Contextual if looks_plural(text) => None,
            ArticlePolicy::Contextual => Some(indefinite(text).to_string()),
        }
    }

    fn noun_phrase(&self, event: &Event, p: &Participant) -> String {
        let text = self.render(event, p);
        match self.article(event, p, &text) {
            Some(a) => format!("{a} {text}"),
            None => text,
        }
    }

    fn prep(&self, p: &Participant) -> PrepEntry {
        let mut e = self
            .cfg
            .prepositions
            .lookup(p.mention.etype, &p.mention.label);
        if let Some(prep) = &p.mention.hints.prep {
            e.prep = prep.clone();
        }
        e
    }

    fn outcome_text(
        &self,
        event: &Event,
        in_clause: &dyn Fn(&Participant) -> bool,
    ) -> Option<String> {
        if let Some(r) = event.result() {
            if in_clause(r) {
                return None;
            }
            return Some(self.render(event, r));
        }
        let step = self.an.chains.step(&event.event_id)?;
        step.outcome
            .as_ref()
            .map(|o| o.render(self.cfg.effective_max()))
    }
}

fn mention_at<'l>(
    mentions: &'l [ExplicitMention],
    span: &Span,
    token: usize,
) -> Option<&'l ExplicitMention> {
    mentions.iter().find(|m| {
        m.span.sentence == span.sentence && m.span.start == token && m.span.end <= span.end
    })
}

fn in_span(p: &Participant, span: &Span) -> bool {
    p.mention
        .span
        .is_some_and(|s| s.sentence == span.sentence && s.start >= span.start && s.end <= span.end)
}

/// Renders one clause; returns the text and whether it ends in an outcome phrase.
fn render_clause(ctx: &Ctx, clause: &Clause, sentence_initial: bool) -> (String, bool) {
    let an = ctx.an;
    let event = &an.events[clause.event];
    let sent = &an.doc.sentences[event.sentence - 1];
    let range = Span::new(event.sentence, clause.start, clause.end);
    let inside = |p: &Participant| in_span(p, &range);

    let mut front: Vec<String> = Vec::new();
    let mut trailing_hab: Vec<String> = Vec::new();
    let mut trailing_tool: Vec<String> = Vec::new();
    let mut attached: Vec<String> = Vec::new();
    let mut objects: Vec<String> = Vec::new();
    let lexicon = ctx.cfg.placement == AdjunctPlacement::Lexicon;
    for p in &event.participants {
        if inside(p) {
            continue;
        }
        let np = ctx.noun_phrase(event, p);
        match p.mention.etype {
            EntityType::Tool => {
                if lexicon {
                    front.push(format!("using {np}"));
                } else {
                    trailing_tool.push(format!("{} {np}", ctx.prep(p).prep));
                }
            }
            EntityType::Habitat => {
                let e = ctx.prep(p);
                let phrase = format!("{} {np}", e.prep);
                if lexicon && e.position == Placement::Front {
                    front.push(phrase);
                } else {
                    trailing_hab.push(phrase);
                }
            }
            EntityType::Ingredient => {
                if p.relation == Relation::ResultOf {
                    continue;
                }
                if p.is_main_ingredient() {
                    objects.push(np);
                } else {
                    attached.push(format!("{} {np}", ctx.prep(p).prep));
                }
            }
            EntityType::EventHead => {}
        }
    }

    let head = event.head_span();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut i = clause.start;
    while i <= clause.end {
        let next = match mention_at(&an.layers.mentions, &range, i) {
            Some(m) => {
                let text = match event.participant(&m.id) {
                    Some(p) => ctx.render(event, p),
                    None => m.text.clone(),
                };
                pieces.push(Piece {
                    text,
                    attach: false,
                    space_after: sent.token(m.span.end).space_after(),
                    first_token: Some(i),
                });
                m.span.end + 1
            }
            None => {
                pieces.push(token_piece(sent, i));
                i + 1
            }
        };
        if i <= head.end && head.end < next && !objects.is_empty() {
            push_word(&mut pieces, join_list(&objects));
        }
        i = next;
    }

    // hidden habitats go before the first explicit habitat role span
    if !trailing_hab.is_empty() {
        let anchor = event
            .alignments
            .iter()
            .filter(|a| range.contains_token(a.span.start) && a.span.sentence == range.sentence)
            .filter(|a| {
                a.entities.iter().any(|id| {
                    event
                        .participant(id)
                        .is_some_and(|p| p.mention.etype == EntityType::Habitat)
                })
            })
            .map(|a| a.span.start)
            .min();
        let at = anchor.and_then(|t| pieces.iter().position(|p| p.first_token == Some(t)));
        let phrases: Vec<Piece> = trailing_hab.drain(..).map(Piece::word).collect();
        match at {
            Some(pos) => {
                if pos > 0 {
                    pieces[pos - 1].space_after = true;
                }
                pieces.splice(pos..pos, phrases);
            }
            None => {
                for a in attached.drain(..) {
                    push_word(&mut pieces, a);
                }
                for ph in phrases {
                    push_word(&mut pieces, ph.text);
                }
            }
        }
    }
    for a in attached {
        push_word(&mut pieces, a);
    }
    for t in trailing_tool {
        push_word(&mut pieces, t);
    }
    if let Some(last) = pieces.last_mut() {
        last.space_after = true;
    }

    if !front.is_empty() {
        if let Some(first) = pieces.first_mut() {
            if first.first_token == Some(1) && sent.token(1).upos != "PROPN" {
                first.text = lowercase_first(&first.text);
            }
        }
        let mut lead = Piece::word(format!("{},", front.join(" ")));
        lead.space_after = true;
        pieces.insert(0, lead);
    }

    let outcome = ctx.outcome_text(event, &inside);
    let mut text = join_pieces(&pieces);
    if let Some(o) = &outcome {
        match ctx.cfg.outcome {
            OutcomeStyle::ResultingIn => text.push_str(&format!(", resulting in {o}")),
            OutcomeStyle::ToGet => text.push_str(&format!(" to get {o}")),
        }
    }
    if sentence_initial {
        text = capitalize(&text);
    }
    (text, outcome.is_some())
}

/// HRP of a single event clause.
pub fn emit_hrp(an: &Analysis, event_id: &str, cfg: &DpConfig) -> Option<String> {
    let ei = an.event_position(event_id)?;
    let sentence = an.events[ei].sentence;
    let cls = clauses(an, sentence);
    let k = cls.iter().position(|c| c.event == ei)?;
    Some(render_clause(&Ctx { an, cfg }, &cls[k], k == 0).0)
}

/// HRP of one 1-based sentence.
pub fn hrp_sentence(an: &Analysis, sentence: usize, cfg: &DpConfig) -> String {
    let sent = &an.doc.sentences[sentence - 1];
    let cls = clauses(an, sentence);
    if cls.is_empty() {
        return sent.full_text();
    }
    let ctx = Ctx { an, cfg };
    let mut pieces: Vec<Piece> = Vec::new();
    for (k, clause) in cls.iter().enumerate() {
        let (mut text, has_outcome) = render_clause(&ctx, clause, k == 0);
        if has_outcome {
            if let Some(&g) = clause.glue.first() {
                if sent.token(g).upos == "CCONJ" {
                    text.push(';');
                }
            }
        }
        pieces.push(Piece::word(text));
        for &g in &clause.glue {
            pieces.push(token_piece(sent, g));
        }
    }
    join_pieces(&pieces)
}

fn relation_key(p: &Participant) -> MrpKey {
    match (p.mention.etype, p.relation) {
        (EntityType::Tool, _) => MrpKey::ToolOf,
        (EntityType::Habitat, _) => MrpKey::HabitatOf,
        (_, Relation::ResultOf) => MrpKey::ResultOf,
        _ => MrpKey::IngreOf,
    }
}

/// Value naming a head in relational tags: the last head word, lowercased.
pub fn head_value(an: &Analysis, event: &Event) -> String {
    let span = event.head_span();
    an.doc.sentences[span.sentence - 1]
        .token(span.end)
        .surface
        .to_lowercase()
}

fn pre_block(ctx: &Ctx, event: &Event) -> Vec<Pair> {
    let cfg = ctx.cfg;
    let mut tools = Vec::new();
    let mut habitats = Vec::new();
    let mut parts = Vec::new();
    let mut results = Vec::new();
    for p in event.participants.iter().filter(|p| p.mention.is_hidden()) {
        let value = clean_value(&ctx.render(event, p));
        if value.is_empty() {
            continue;
        }
        match (p.mention.etype, p.relation) {
            (EntityType::Tool, _) => tools.push((MrpKey::Tool, value)),
            (EntityType::Habitat, _) => habitats.push((MrpKey::Habitat, value)),
            (EntityType::Ingredient, Relation::ResultOf) => {
                results.push((cfg.key(MrpKey::IngreResult), value))
            }
            (EntityType::Ingredient, _) => parts.push((cfg.key(MrpKey::IngrePart), value)),
            _ => {}
        }
    }
    let mut out = tools;
    out.extend(habitats);
    out.extend(parts);
    out.extend(results);
    if event.result().is_none() {
        if let Some(o) = ctx
            .an
            .chains
            .step(&event.event_id)
            .and_then(|s| s.outcome.as_ref())
        {
            let v = clean_value(&o.render(cfg.effective_max()));
            if !v.is_empty() {
                out.push((MrpKey::Outcome, v));
            }
        }
    }
    out
}

fn push_words(tokens: &mut Vec<MrpToken>, text: &str) {
    for w in text.split_whitespace() {
        tokens.push(MrpToken::Word(w.to_string()));
    }
}

/// MRP structure of one event over its clause.
pub fn mrp_event(an: &Analysis, event_id: &str, cfg: &DpConfig) -> Option<MrpEvent> {
    let ei = an.event_position(event_id)?;
    let event = &an.events[ei];
    let clause = clauses(an, event.sentence)
        .into_iter()
        .find(|c| c.event == ei)?;
    let ctx = Ctx { an, cfg };
    let sent = &an.doc.sentences[event.sentence - 1];
    let range = Span::new(event.sentence, clause.start, clause.end);
    let head = event.head_span();
    let value = head_value(an, event);
    let pre = pre_block(&ctx, event);
    let mut tokens = Vec::new();
    let mut inline_tags = Vec::new();
    let mut i = clause.start;
    while i <= clause.end {
        match mention_at(&an.layers.mentions, &range, i) {
            Some(m) => {
                match event.participant(&m.id) {
                    Some(p) => {
                        push_words(&mut tokens, &ctx.render(event, p));
                        let tag = (cfg.key(relation_key(p)), value.clone());
                        inline_tags.push(tag.clone());
                        tokens.push(MrpToken::Block(vec![tag]));
                    }
                    None => push_words(&mut tokens, &m.text),
                }
                i = m.span.end + 1;
            }
            None => {
                push_words(&mut tokens, &sent.token(i).surface);
                if i == head.end && !pre.is_empty() {
                    tokens.push(MrpToken::Block(pre.clone()));
                }
                i += 1;
            }
        }
    }
    Some(MrpEvent {
        head: sent.token(head.end).surface.clone(),
        pre_block: pre,
        inline_tags,
        tokens,
    })
}

pub fn emit_mrp(an: &Analysis, event_id: &str, cfg: &DpConfig) -> Option<String> {
    mrp_event(an, event_id, cfg).map(|e| e.to_text())
}

/// MRP of one 1-based sentence with every event's blocks.
pub fn mrp_sentence(an: &Analysis, sentence: usize, cfg: &DpConfig) -> String {
    let ctx = Ctx { an, cfg };
    let sent = &an.doc.sentences[sentence - 1];
    let range = Span::new(sentence, 1, sent.tokens.len());
    let mut heads: HashMap<usize, Vec<Pair>> = HashMap::new();
    for e in an.events.iter().filter(|e| e.sentence == sentence) {
        heads.insert(e.head_span().end, pre_block(&ctx, e));
    }
    let mut tokens = Vec::new();
    let mut i = 1;
    while i <= sent.tokens.len() {
        match mention_at(&an.layers.mentions, &range, i) {
            Some(m) => {
                let related: Vec<(&Event, &Participant)> = an
                    .events
                    .iter()
                    .filter_map(|e| e.participant(&m.id).map(|p| (e, p)))
                    .collect();
                let shown = related
                    .iter()
                    .find(|(e, _)| e.sentence == sentence)
                    .or(related.first());
                match shown {
                    Some((e, p)) => push_words(&mut tokens, &ctx.render(e, p)),
                    None => push_words(&mut tokens, &m.text),
                }
                let tags: Vec<Pair> = related
                    .iter()
                    .map(|(e, p)| (cfg.key(relation_key(p)), head_value(an, e)))
                    .collect();
                if !tags.is_empty() {
                    tokens.push(MrpToken::Block(tags));
                }
                i = m.span.end + 1;
            }
            None => {
                push_words(&mut tokens, &sent.token(i).surface);
                if let Some(pre) = heads.get(&i).filter(|p| !p.is_empty()) {
                    tokens.push(MrpToken::Block(pre.clone()));
                }
                i += 1;
            }
        }
    }
    render_tokens(&tokens)
}

/// Groups sentence texts into windows of at most `cfg.window_sentences`.
pub fn windows(sentences: &[String], cfg: &DpConfig) -> Vec<String> {
    let max = cfg.window_sentences.max(1);
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut chars = 0;
    for s in sentences {
        let over_budget = cfg
            .window_chars
            .is_some_and(|b| !current.is_empty() && chars + 1 + s.len() > b);
        if current.len() == max || over_budget {
            out.push(current.join(" "));
            current.clear();
            chars = 0;
        }
        chars += if current.is_empty() {
            s.len()
        } else {
            s.len() + 1
        };
        current.push(s);
    }
    if !current.is_empty() {
        out.push(current.join(" "));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paraphrase {
    /// One HRP line per sentence.
    pub hrp: Vec<String>,
    /// One MRP line per window.
    pub mrp: Vec<String>,
}

pub fn paraphrase_document(an: &Analysis, cfg: &DpConfig) -> Paraphrase {
    let n = an.doc.sentences.len();
    let hrp = (1..=n).map(|s| hrp_sentence(an, s, cfg)).collect();
    let mrp_sentences: Vec<String> = (1..=n).map(|s| mrp_sentence(an, s, cfg)).collect();
    Paraphrase {
        hrp,
        mrp: windows(&mrp_sentences, cfg),
    }
}

/// Which paraphrase rendering to print.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rendering {
    #[default]
    Hrp,
    Mrp,
}

impl std::str::FromStr for Rendering {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "hrp" => Ok(Rendering::Hrp),
            "mrp" => Ok(Rendering::Mrp),
            other => Err(format!(
                "unknown paraphrase mode `{other}` (expected hrp or mrp)"
            )),
        }
    }
}

/// Newline-terminated paraphrase lines of one document.
///
/// The CLI and the service preview both print exactly this text.
pub fn render_text(an: &Analysis, cfg: &DpConfig, rendering: Rendering) -> String {
    let p = paraphrase_document(an, cfg);
    let lines = match rendering {
        Rendering::Hrp => p.hrp,
        Rendering::Mrp => p.mrp,
    };
    lines.into_iter().map(|l| l + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicon_lookup() {
        let lex = PrepositionLexicon::default();
        assert_eq!(lex.lookup(EntityType::Habitat, "cutting board").prep, "on");
        assert_eq!(
            lex.lookup(EntityType::Habitat, "oven").position,
            Placement::Front
        );
        assert_eq!(lex.lookup(EntityType::Habitat, "medium heat").prep, "over");
        assert_eq!(lex.lookup(EntityType::Habitat, "cake pan").prep, "in");
        assert_eq!(lex.lookup(EntityType::Ingredient, "batter").prep, "in");
        assert_eq!(lex.lookup(EntityType::Tool, "knife").prep, "with");
    }

    #[test]
    fn window_arithmetic() {
        let cfg = DpConfig::default();
        let s: Vec<String> = (0..7).map(|i| format!("s{i}")).collect();
        let w = windows(&s, &cfg);
        assert_eq!(w, vec!["s0 s1 s2", "s3 s4 s5", "s6"]);
        assert_eq!(windows(&s[..1], &cfg).len(), 1);
        assert!(windows(&[], &cfg).is_empty());
    }

    #[test]
    fn transfer_caps_states() {
        let mut cfg = DpConfig::transfer();
        assert_eq!(cfg.effective_max(), Some(2));
        cfg.max_end_states = None;
        assert_eq!(cfg.effective_max(), Some(2));
        assert_eq!(cfg.key(MrpKey::IngrePart), MrpKey::ObjectPart);
    }

    #[test]
    fn articles() {
        assert_eq!(indefinite("oven"), "an");
        assert_eq!(indefinite("knife"), "a");
    }
}

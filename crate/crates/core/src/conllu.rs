//! Reader and writer for the extended CoNLL-U dialect.
//!
//! Token lines are standard 10-column CoNLL-U. Annotation layers ride in
//! MISC (`Entity`, `Event`, `Frame`, `Role`); hidden entities, event links
//! and coreference chains are document-level comments. See `docs/format.md`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{mention_id, EntityType, HiddenKind, Relation, Span};

/// One MISC item. `value` is `None` for bare keys without `=`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiscItem {
    pub key: String,
    pub value: Option<String>,
}

/// Ordered MISC map with unique keys.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Misc(pub Vec<MiscItem>);

impl Misc {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|item| item.key == key)
            .map(|item| item.value.as_deref().unwrap_or(""))
    }

    /// Sets `key`, keeping its position if present.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = Some(value.into());
        match self.0.iter_mut().find(|item| item.key == key) {
            Some(item) => item.value = value,
            None => self.0.push(MiscItem {
                key: key.to_string(),
                value,
            }),
        }
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        let pos = self.0.iter().position(|item| item.key == key)?;
        self.0.remove(pos).value
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn parse(field: &str) -> std::result::Result<Misc, String> {
        if field == "_" {
            return Ok(Misc::default());
        }
        let mut items = Vec::new();
        let mut seen = HashSet::new();
        for raw in field.split('|') {
            if raw.is_empty() {
                return Err("empty MISC item".into());
            }
            let (key, value) = match raw.split_once('=') {
                Some((k, v)) => (k, Some(v.to_string())),
                None => (raw, None),
            };
            if key.is_empty() {
                return Err(format!("MISC item `{raw}` has an empty key"));
            }
            if !seen.insert(key.to_string()) {
                return Err(format!("duplicate MISC key `{key}`"));
            }
            items.push(MiscItem {
                key: key.to_string(),
                value,
            });
        }
        Ok(Misc(items))
    }
}

impl fmt::Display for Misc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("_");
        }
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char('|')?;
            }
            f.write_str(&item.key)?;
            if let Some(v) = &item.value {
                write!(f, "={v}")?;
            }
        }
        Ok(())
    }
}

/// One token line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// Dependency head; 0 is the root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: Misc,
}

impl Token {
    /// Token with placeholder columns, for building documents in code.
    pub fn new(
        index: usize,
        surface: &str,
        lemma: &str,
        upos: &str,
        head: usize,
        deprel: &str,
    ) -> Self {
        Token {
            index,
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            upos: upos.to_string(),
            xpos: "_".to_string(),
            feats: "_".to_string(),
            head,
            deprel: deprel.to_string(),
            deps: "_".to_string(),
            misc: Misc::default(),
        }
    }

    pub fn space_after(&self) -> bool {
        self.misc.get("SpaceAfter") != Some("No")
    }

    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT"
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    /// Raw comment lines, including the leading `#`.
    pub comments: Vec<String>,
}

impl Sentence {
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// Surface text of an inclusive token range, honouring `SpaceAfter=No`.
    pub fn text(&self, start: usize, end: usize) -> String {
        let mut out = String::new();
        for i in start..=end {
            let tok = self.token(i);
            out.push_str(&tok.surface);
            if i < end && tok.space_after() {
                out.push(' ');
            }
        }
        out
    }

    pub fn full_text(&self) -> String {
        if self.tokens.is_empty() {
            String::new()
        } else {
            self.text(1, self.tokens.len())
        }
    }
}

/// Optional surface hints carried by a hidden entity declaration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceHints {
    /// Semantic role overriding the type default.
    pub role: Option<String>,
    /// Preposition overriding the lexicon.
    pub prep: Option<String>,
    /// Article; `-` forces a bare noun.
    pub det: Option<String>,
}

impl SurfaceHints {
    pub fn is_empty(&self) -> bool {
        self.role.is_none() && self.prep.is_none() && self.det.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiddenEntityDecl {
    pub hid: String,
    pub label: String,
    pub etype: EntityType,
    pub subtype: HiddenKind,
    pub anchor_event: String,
    #[serde(default)]
    pub hints: SurfaceHints,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefDecl {
    pub chain_id: String,
    pub mentions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLink {
    pub entity: String,
    pub relation: Relation,
    pub event: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub provenance: String,
    pub sentences: Vec<Sentence>,
    pub hidden_entities: Vec<HiddenEntityDecl>,
    pub coref_decls: Vec<CorefDecl>,
    pub event_links: Vec<EventLink>,
}

pub type Corpus = Vec<Document>;

/// Explicit entity mention read from `Entity` BIO tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitMention {
    pub id: String,
    pub etype: EntityType,
    pub span: Span,
    pub text: String,
}

/// Event head read from `Entity=B-EVENT` plus `Event=` and `Frame=`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventHead {
    pub event_id: String,
    pub frame: String,
    pub span: Span,
    pub lemma: String,
    pub surface: String,
}

/// SRL role span read from `Role` BIO tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSpan {
    pub event_id: String,
    pub role: String,
    pub span: Span,
}

/// Annotation layers decoded from token MISC columns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layers {
    /// Non-head entity mentions in document order.
    pub mentions: Vec<ExplicitMention>,
    /// Event heads in document order (sentence, then token).
    pub heads: Vec<EventHead>,
    pub roles: Vec<RoleSpan>,
}

impl Layers {
    pub fn mention(&self, id: &str) -> Option<&ExplicitMention> {
        self.mentions.iter().find(|m| m.id == id)
    }

    pub fn head(&self, event_id: &str) -> Option<&EventHead> {
        self.heads.iter().find(|h| h.event_id == event_id)
    }
}

/// Layer decoding error located at a token (1-based sentence and token).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerError {
    pub sentence: usize,
    pub token: usize,
    pub reason: String,
}

impl Document {
    pub fn new(doc_id: &str) -> Self {
        Document {
            doc_id: doc_id.to_string(),
            ..Default::default()
        }
    }

    pub fn hidden(&self, hid: &str) -> Option<&HiddenEntityDecl> {
        self.hidden_entities.iter().find(|h| h.hid == hid)
    }

    /// Decodes the MISC annotation layers.
    pub fn layers(&self) -> Result<Layers> {
        decode_layers(&self.sentences).map_err(|e| Error::InvalidDocument {
            doc: self.doc_id.clone(),
            reason: format!("sentence {} token {}: {}", e.sentence, e.token, e.reason),
        })
    }

    /// Checks that every link, chain member and anchor resolves.
    pub fn check_references(&self) -> Result<()> {
        let layers = self.layers()?;
        reference_errors(self, &layers, &|_| 0).map_err(|(_, id)| Error::InvalidDocument {
            doc: self.doc_id.clone(),
            reason: format!("unresolved reference `{id}`"),
        })
    }
}

/// Splits a BIO tag into its prefix and label.
fn split_bio(tag: &str) -> std::result::Result<(char, &str), String> {
    match tag.split_once('-') {
        Some(("B", label)) if !label.is_empty() => Ok(('B', label)),
        Some(("I", label)) if !label.is_empty() => Ok(('I', label)),
        _ => Err(format!("malformed BIO tag `{tag}`")),
    }
}

pub fn decode_layers(sentences: &[Sentence]) -> std::result::Result<Layers, LayerError> {
    let mut layers = Layers::default();
    let mut event_ids = HashSet::new();
    for (si, sentence) in sentences.iter().enumerate() {
        let sent = si + 1;
        let err = |token: usize, reason: String| LayerError {
            sentence: sent,
            token,
            reason,
        };
        // (etype, start) of the open entity span
        let mut open: Option<(EntityType, usize)> = None;
        let mut open_roles: BTreeMap<String, (String, usize)> = BTreeMap::new();
        let mut entity_spans: Vec<(EntityType, usize, usize)> = Vec::new();
        let mut role_spans: Vec<(String, String, usize, usize)> = Vec::new();

        for tok in &sentence.tokens {
            let i = tok.index;
            let tag = tok
                .misc
                .get("Entity")
                .filter(|t| !t.is_empty() && *t != "O");
            match tag {
                None => {
                    if let Some((etype, start)) = open.take() {
                        entity_spans.push((etype, start, i - 1));
                    }
                }
                Some(tag) => {
                    let (prefix, label) = split_bio(tag).map_err(|r| err(i, r))?;
                    let etype: EntityType = label.parse().map_err(|r| err(i, r))?;
                    if prefix == 'B' {
                        if let Some((t, start)) = open.take() {
                            entity_spans.push((t, start, i - 1));
                        }
                        open = Some((etype, i));
                    } else {
                        match open {
                            Some((t, _)) if t == etype => {}
                            _ => {
                                return Err(err(
                                    i,
                                    format!("I-{label} does not continue a {label} span"),
                                ))
                            }
                        }
                    }
                }
            }

            let mut seen_here = HashSet::new();
            if let Some(value) = tok.misc.get("Role").filter(|v| !v.is_empty()) {
                for part in value.split(',') {
                    let (event, tag) = part
                        .split_once(':')
                        .ok_or_else(|| err(i, format!("role item `{part}` lacks `event:`")))?;
                    if event.is_empty() {
                        return Err(err(i, format!("role item `{part}` has an empty event")));
                    }
                    if !seen_here.insert(event.to_string()) {
                        return Err(err(i, format!("two role tags for `{event}` on one token")));
                    }
                    let (prefix, role) = split_bio(tag).map_err(|r| err(i, r))?;
                    if prefix == 'B' {
                        if let Some((r, start)) = open_roles.remove(event) {
                            role_spans.push((event.to_string(), r, start, i - 1));
                        }
                        open_roles.insert(event.to_string(), (role.to_string(), i));
                    } else {
                        match open_roles.get(event) {
                            Some((r, _)) if r == role => {}
                            _ => {
                                return Err(err(
                                    i,
                                    format!(
                                        "I-{role} for `{event}` does not continue a {role} span"
                                    ),
                                ))
                            }
                        }
                    }
                }
            }
            let closed: Vec<String> = open_roles
                .keys()
                .filter(|e| !seen_here.contains(*e))
                .cloned()
                .collect();
            for event in closed {
                let (role, start) = open_roles.remove(&event).unwrap();
                role_spans.push((event, role, start, i - 1));
            }
        }
        let n = sentence.tokens.len();
        if let Some((etype, start)) = open.take() {
            entity_spans.push((etype, start, n));
        }
        for (event, (role, start)) in open_roles {
            role_spans.push((event, role, start, n));
        }

        for (etype, start, end) in entity_spans {
            let span = Span::new(sent, start, end);
            if etype == EntityType::EventHead {
                let first = sentence.token(start);
                let event_id = first
                    .misc
                    .get("Event")
                    .filter(|v| !v.is_empty())
                    .ok_or_else(|| err(start, "event head without `Event=` id".into()))?
                    .to_string();
                if !event_ids.insert(event_id.clone()) {
                    return Err(err(start, format!("duplicate event id `{event_id}`")));
                }
                let lemma = (start..=end)
                    .map(|t| sentence.token(t).lemma.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                layers.heads.push(EventHead {
                    event_id,
                    frame: first.misc.get("Frame").unwrap_or("").to_string(),
                    span,
                    lemma,
                    surface: sentence.text(start, end),
                });
            } else {
                layers.mentions.push(ExplicitMention {
                    id: mention_id(sent, start),
                    etype,
                    span,
                    text: sentence.text(start, end),
                });
            }
        }
        role_spans.sort_by_key(|(_, _, start, _)| *start);
        for (event_id, role, start, end) in role_spans {
            layers.roles.push(RoleSpan {
                event_id,
                role,
                span: Span::new(sent, start, end),
            });
        }
    }
    for tok_event in layers.roles.iter() {
        if !event_ids.contains(&tok_event.event_id) {
            return Err(LayerError {
                sentence: tok_event.span.sentence,
                token: tok_event.span.start,
                reason: format!("role span refers to unknown event `{}`", tok_event.event_id),
            });
        }
    }
    Ok(layers)
}

/// First unresolved reference as (line, id); `line_of` maps a comment index to its line.
fn reference_errors(
    doc: &Document,
    layers: &Layers,
    line_of: &dyn Fn(RefSite) -> usize,
) -> std::result::Result<(), (usize, String)> {
    let events: HashSet<&str> = layers.heads.iter().map(|h| h.event_id.as_str()).collect();
    let mut entities: HashSet<&str> = layers.mentions.iter().map(|m| m.id.as_str()).collect();
    for (i, h) in doc.hidden_entities.iter().enumerate() {
        if !events.contains(h.anchor_event.as_str()) {
            return Err((line_of(RefSite::Hidden(i)), h.anchor_event.clone()));
        }
        entities.insert(h.hid.as_str());
    }
    for (i, link) in doc.event_links.iter().enumerate() {
        if !entities.contains(link.entity.as_str()) {
            return Err((line_of(RefSite::Link(i)), link.entity.clone()));
        }
        if !events.contains(link.event.as_str()) {
            return Err((line_of(RefSite::Link(i)), link.event.clone()));
        }
    }
    for (i, chain) in doc.coref_decls.iter().enumerate() {
        for m in &chain.mentions {
            if !entities.contains(m.as_str()) {
                return Err((line_of(RefSite::Coref(i)), m.clone()));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum RefSite {
    Hidden(usize),
    Link(usize),
    Coref(usize),
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_hidden(body: &str, line: usize) -> Result<HiddenEntityDecl> {
    let fields: Vec<&str> = body.split('|').collect();
    if fields.len() < 5 {
        return Err(parse_err(
            line,
            "hidden entity needs `hid|label|TYPE|subtype|event`",
        ));
    }
    let hid = fields[0].trim();
    if hid.is_empty() {
        return Err(parse_err(line, "hidden entity with empty id"));
    }
    if hid.starts_with("m_") {
        return Err(parse_err(
            line,
            format!("hidden id `{hid}` collides with mention ids"),
        ));
    }
    let label = fields[1].trim().to_string();
    let etype: EntityType = fields[2]
        .trim()
        .parse()
        .map_err(|e: String| parse_err(line, e))?;
    if !etype.is_hideable() {
        return Err(parse_err(line, "hidden entities cannot be event heads"));
    }
    let subtype: HiddenKind = fields[3]
        .trim()
        .parse()
        .map_err(|e: String| parse_err(line, e))?;
    if subtype == HiddenKind::Shadow && label.is_empty() {
        return Err(parse_err(
            line,
            format!("shadow entity `{hid}` needs a label"),
        ));
    }
    let anchor_event = fields[4].trim().to_string();
    if anchor_event.is_empty() {
        return Err(parse_err(line, "hidden entity with empty anchor event"));
    }
    let mut hints = SurfaceHints::default();
    for extra in &fields[5..] {
        let (key, value) = extra
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("hint `{extra}` is not `key=value`")))?;
        let slot = match key.trim() {
            "role" => &mut hints.role,
            "prep" => &mut hints.prep,
            "det" => &mut hints.det,
            other => return Err(parse_err(line, format!("unknown hint `{other}`"))),
        };
        if slot.is_some() {
            return Err(parse_err(line, format!("duplicate hint `{key}`")));
        }
        *slot = Some(value.trim().to_string());
    }
    Ok(HiddenEntityDecl {
        hid: hid.to_string(),
        label,
        etype,
        subtype,
        anchor_event,
        hints,
    })
}

fn parse_link(body: &str, line: usize) -> Result<EventLink> {
    let fields: Vec<&str> = body.split('|').map(str::trim).collect();
    if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
        return Err(parse_err(line, "link needs `entity|relation|event`"));
    }
    let relation = fields[1].parse().map_err(|e: String| parse_err(line, e))?;
    Ok(EventLink {
        entity: fields[0].to_string(),
        relation,
        event: fields[2].to_string(),
    })
}

fn parse_coref(body: &str, line: usize) -> Result<CorefDecl> {
    let (id, members) = body
        .split_once('=')
        .ok_or_else(|| parse_err(line, "coref needs `chain = mention, ...`"))?;
    let chain_id = id.trim();
    if chain_id.is_empty() {
        return Err(parse_err(line, "coref chain with empty id"));
    }
    let mentions: Vec<String> = members.split(',').map(|m| m.trim().to_string()).collect();
    if mentions.iter().any(|m| m.is_empty()) {
        return Err(parse_err(line, "empty mention reference in coref chain"));
    }
    let mut seen = HashSet::new();
    for m in &mentions {
        if !seen.insert(m) {
            return Err(parse_err(
                line,
                format!("mention `{m}` repeated in chain `{chain_id}`"),
            ));
        }
    }
    Ok(CorefDecl {
        chain_id: chain_id.to_string(),
        mentions,
    })
}

fn parse_token(line: &str, lineno: usize) -> Result<Token> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(parse_err(
            lineno,
            format!("expected 10 tab-separated columns, found {}", cols.len()),
        ));
    }
    let index: usize = cols[0].parse().map_err(|_| {
        parse_err(
            lineno,
            format!("token id `{}` is not a positive integer", cols[0]),
        )
    })?;
    let head: usize = cols[6].parse().map_err(|_| {
        parse_err(
            lineno,
            format!("head `{}` is not a non-negative integer", cols[6]),
        )
    })?;
    for (i, col) in cols.iter().enumerate() {
        if col.is_empty() {
            return Err(parse_err(lineno, format!("column {} is empty", i + 1)));
        }
    }
    let misc = Misc::parse(cols[9]).map_err(|r| parse_err(lineno, r))?;
    Ok(Token {
        index,
        surface: cols[1].to_string(),
        lemma: cols[2].to_string(),
        upos: cols[3].to_string(),
        xpos: cols[4].to_string(),
        feats: cols[5].to_string(),
        head,
        deprel: cols[7].to_string(),
        deps: cols[8].to_string(),
        misc,
    })
}

/// Per-document line bookkeeping used for error reporting.
#[derive(Default)]
struct DocLines {
    newdoc: usize,
    hidden: Vec<usize>,
    links: Vec<usize>,
    corefs: Vec<usize>,
    /// token lines per sentence
    tokens: Vec<Vec<usize>>,
}

struct Builder {
    doc: Document,
    lines: DocLines,
    tokens: Vec<Token>,
    token_lines: Vec<usize>,
    comments: Vec<String>,
    comment_line: usize,
}

impl Builder {
    fn new(doc_id: String, line: usize) -> Self {
        Builder {
            doc: Document::new(&doc_id),
            lines: DocLines {
                newdoc: line,
                ..Default::default()
            },
            tokens: Vec::new(),
            token_lines: Vec::new(),
            comments: Vec::new(),
            comment_line: 0,
        }
    }

    fn end_sentence(&mut self) -> Result<()> {
        if self.tokens.is_empty() {
            if !self.comments.is_empty() {
                return Err(parse_err(
                    self.comment_line,
                    "sentence comments without tokens",
                ));
            }
            return Ok(());
        }
        let tokens = std::mem::take(&mut self.tokens);
        let lines = std::mem::take(&mut self.token_lines);
        let n = tokens.len();
        let mut roots = 0;
        for (i, tok) in tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(parse_err(
                    lines[i],
                    format!("token id {} out of sequence, expected {}", tok.index, i + 1),
                ));
            }
            if tok.head > n {
                return Err(parse_err(
                    lines[i],
                    format!("head {} beyond sentence length {n}", tok.head),
                ));
            }
            if tok.head == tok.index {
                return Err(parse_err(lines[i], "token is its own head"));
            }
            if tok.head == 0 {
                roots += 1;
                if roots > 1 {
                    return Err(parse_err(lines[i], "second root token in sentence"));
                }
            }
        }
        if roots == 0 {
            return Err(parse_err(lines[0], "sentence has no root token"));
        }
        self.doc.sentences.push(Sentence {
            tokens,
            comments: std::mem::take(&mut self.comments),
        });
        self.lines.tokens.push(lines);
        Ok(())
    }

    fn finish(mut self) -> Result<Document> {
        self.end_sentence()?;
        let lines = &self.lines;
        let layers = decode_layers(&self.doc.sentences).map_err(|e| {
            let line = lines.tokens[e.sentence - 1][e.token - 1];
            parse_err(line, e.reason)
        })?;
        let mut hids = HashSet::new();
        for (i, h) in self.doc.hidden_entities.iter().enumerate() {
            if !hids.insert(h.hid.as_str()) {
                return Err(parse_err(
                    lines.hidden[i],
                    format!("duplicate hidden id `{}`", h.hid),
                ));
            }
        }
        let mut chains = HashSet::new();
        for (i, c) in self.doc.coref_decls.iter().enumerate() {
            if !chains.insert(c.chain_id.as_str()) {
                return Err(parse_err(
                    lines.corefs[i],
                    format!("duplicate chain id `{}`", c.chain_id),
                ));
            }
        }
        let line_of = |site: RefSite| match site {
            RefSite::Hidden(i) => lines.hidden[i],
            RefSite::Link(i) => lines.links[i],
            RefSite::Coref(i) => lines.corefs[i],
        };
        reference_errors(&self.doc, &layers, &line_of)
            .map_err(|(line, id)| Error::DanglingRef { line, id })?;
        Ok(self.doc)
    }
}

fn comment_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix(key)?;
    let rest = rest.trim_start();
    if let Some(v) = rest.strip_prefix('=') {
        return Some(v.trim());
    }
    if let Some(v) = rest.strip_prefix(':') {
        return Some(v.trim());
    }
    None
}

/// Parses a corpus from raw bytes, rejecting invalid UTF-8 with its line number.
pub fn parse_corpus_bytes(input: &[u8]) -> Result<Corpus> {
    match std::str::from_utf8(input) {
        Ok(text) => parse_corpus(text),
        Err(e) => {
            let line = input[..e.valid_up_to()]
                .iter()
                .filter(|b| **b == b'\n')
                .count()
                + 1;
            Err(parse_err(line, "invalid UTF-8"))
        }
    }
}

pub fn parse_corpus(input: &str) -> Result<Corpus> {
    let mut docs: Vec<Document> = Vec::new();
    let mut doc_lines: HashMap<String, usize> = HashMap::new();
    let mut current: Option<Builder> = None;

    let mut finish = |builder: Builder, docs: &mut Vec<Document>| -> Result<()> {
        let line = builder.lines.newdoc;
        let doc = builder.finish()?;
        if doc_lines.insert(doc.doc_id.clone(), line).is_some() {
            return Err(Error::DuplicateDoc(doc.doc_id));
        }
        docs.push(doc);
        Ok(())
    };

    for (i, raw) in input.split('\n').enumerate() {
        let lineno = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if let Some(b) = current.as_mut() {
                b.end_sentence()?;
            }
            continue;
        }
        if line.starts_with('#') {
            if let Some(id) = comment_value(line, "newdoc id") {
                if id.is_empty() {
                    return Err(parse_err(lineno, "newdoc with empty id"));
                }
                if let Some(b) = current.take() {
                    finish(b, &mut docs)?;
                }
                current = Some(Builder::new(id.to_string(), lineno));
                continue;
            }
            let b = current
                .as_mut()
                .ok_or_else(|| parse_err(lineno, "comment before `# newdoc id = ...`"))?;
            if let Some(v) = comment_value(line, "title") {
                b.doc.title = v.to_string();
            } else if let Some(v) = comment_value(line, "provenance") {
                b.doc.provenance = v.to_string();
            } else if let Some(v) = comment_value(line, "hidden") {
                b.doc.hidden_entities.push(parse_hidden(v, lineno)?);
                b.lines.hidden.push(lineno);
            } else if let Some(v) = comment_value(line, "link") {
                b.doc.event_links.push(parse_link(v, lineno)?);
                b.lines.links.push(lineno);
            } else if let Some(v) = comment_value(line, "coref") {
                b.doc.coref_decls.push(parse_coref(v, lineno)?);
                b.lines.corefs.push(lineno);
            } else {
                if !b.tokens.is_empty() {
                    return Err(parse_err(lineno, "sentence comment after token lines"));
                }
                if b.comments.is_empty() {
                    b.comment_line = lineno;
                }
                b.comments.push(line.to_string());
            }
            continue;
        }
        let b = current
            .as_mut()
            .ok_or_else(|| parse_err(lineno, "token line before `# newdoc id = ...`"))?;
        let first = line.split('\t').next().unwrap_or("");
        if first.contains('-') || first.contains('.') {
            return Err(parse_err(
                lineno,
                format!("multiword or empty-node id `{first}` is not supported"),
            ));
        }
        b.tokens.push(parse_token(line, lineno)?);
        b.token_lines.push(lineno);
    }
    if let Some(b) = current.take() {
        finish(b, &mut docs)?;
    }
    Ok(docs)
}

fn write_hidden(out: &mut String, h: &HiddenEntityDecl) {
    let _ = write!(
        out,
        "# hidden: {}|{}|{}|{}|{}",
        h.hid,
        h.label,
        h.etype,
        h.subtype.as_str(),
        h.anchor_event
    );
    if let Some(v) = &h.hints.role {
        let _ = write!(out, "|role={v}");
    }
    if let Some(v) = &h.hints.prep {
        let _ = write!(out, "|prep={v}");
    }
    if let Some(v) = &h.hints.det {
        let _ = write!(out, "|det={v}");
    }
    out.push('\n');
}

/// Canonical serialization of one document, ending with a blank line.
pub fn write_document(doc: &Document) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# newdoc id = {}", doc.doc_id);
    let _ = writeln!(out, "# title = {}", doc.title);
    let _ = writeln!(out, "# provenance = {}", doc.provenance);
    for h in &doc.hidden_entities {
        write_hidden(&mut out, h);
    }
    for l in &doc.event_links {
        let _ = writeln!(out, "# link: {}|{}|{}", l.entity, l.relation, l.event);
    }
    for c in &doc.coref_decls {
        let _ = writeln!(out, "# coref: {} = {}", c.chain_id, c.mentions.join(", "));
    }
    for sentence in &doc.sentences {
        for c in &sentence.comments {
            out.push_str(c);
            out.push('\n');
        }
        for t in &sentence.tokens {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.index,
                t.surface,
                t.lemma,
                t.upos,
                t.xpos,
                t.feats,
                t.head,
                t.deprel,
                t.deps,
                t.misc
            );
        }
        out.push('\n');
    }
    if doc.sentences.is_empty() {
        out.push('\n');
    }
    out
}

pub fn write_corpus(corpus: &[Document]) -> String {
    corpus.iter().map(write_document).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = "# newdoc id = d1\n# title = Mini\n# provenance = test\n\
# hidden: h1|knife|TOOL|shadow|ev1\n# link: h1|participant-of|ev1\n\
1\tCut\tcut\tVERB\tVB\t_\t0\troot\t_\tEntity=B-EVENT|Event=ev1|Frame=CUT\n\
2\tapples\tapple\tNOUN\tNNS\t_\t1\tobj\t_\tEntity=B-INGREDIENT|Role=ev1:B-Patient|SpaceAfter=No\n\
3\t.\t.\tPUNCT\t.\t_\t1\tpunct\t_\t_\n\n";

    #[test]
    fn token_columns() {
        let corpus = parse_corpus(MINI).unwrap();
        let tok = &corpus[0].sentences[0].tokens[0];
        assert_eq!(tok.index, 1);
        assert_eq!(tok.surface, "Cut");
        assert_eq!(tok.lemma, "cut");
        assert_eq!(tok.misc.get("Frame"), Some("CUT"));
    }

    #[test]
    fn empty_input() {
        assert!(parse_corpus("").unwrap().is_empty());
        assert_eq!(write_corpus(&[]), "");
    }

    #[test]
    fn canonical_text_round_trips() {
        let corpus = parse_corpus(MINI).unwrap();
        assert_eq!(write_corpus(&corpus), MINI);
    }

    #[test]
    fn layers_decoded() {
        let corpus = parse_corpus(MINI).unwrap();
        let layers = corpus[0].layers().unwrap();
        assert_eq!(layers.heads.len(), 1);
        assert_eq!(layers.mentions[0].id, "m_1_2");
        assert_eq!(layers.roles[0].role, "Patient");
    }

    #[test]
    fn column_count_error_names_line() {
        let bad = MINI.replace("3\t.\t.\tPUNCT", "3\t.\tPUNCT");
        match parse_corpus(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_link() {
        let bad = MINI.replace(
            "# link: h1|participant-of|ev1",
            "# link: h9|participant-of|ev1",
        );
        assert_eq!(
            parse_corpus(&bad),
            Err(Error::DanglingRef {
                line: 5,
                id: "h9".into()
            })
        );
    }

    #[test]
    fn duplicate_doc() {
        let twice = format!("{MINI}{MINI}");
        assert_eq!(parse_corpus(&twice), Err(Error::DuplicateDoc("d1".into())));
    }

    #[test]
    fn orphan_inside_tag() {
        let bad = MINI.replace("Entity=B-INGREDIENT", "Entity=I-INGREDIENT");
        match parse_corpus(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_utf8_line() {
        let mut bytes = MINI.as_bytes().to_vec();
        bytes.extend_from_slice(b"\xff");
        match parse_corpus_bytes(&bytes) {
            Err(Error::Parse { line, reason }) => {
                assert_eq!(line, 10);
                assert!(reason.contains("UTF-8"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bare_misc_item_survives() {
        let text = MINI.replace(
            "3\t.\t.\tPUNCT\t.\t_\t1\tpunct\t_\t_",
            "3\t.\t.\tPUNCT\t.\t_\t1\tpunct\t_\tFlag",
        );
        let corpus = parse_corpus(&text).unwrap();
        assert_eq!(write_corpus(&corpus), text);
    }
}

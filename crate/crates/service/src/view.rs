//! Read-only document rendering for clients: tokens with color groups, events and chains.

use densepara::conllu::{EventLink, HiddenEntityDecl};
use densepara::coref::Strictness;
use densepara::events::Event;
use densepara::types::EntityType;
use densepara::{analyze, Document, Resources};
use serde::Serialize;

use crate::error::ServiceError;
use crate::ops::invariant_of;

/// Fixed palette; a group's color depends only on its id.
pub const PALETTE: [&str; 12] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#9a6324",
    "#469990", "#800000", "#808000", "#000075",
];

/// Stable color for a chain, mention or event id (FNV-1a over its bytes).
pub fn color_for(id: &str) -> &'static str {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    PALETTE[(h % PALETTE.len() as u64) as usize]
}

#[derive(Debug, Clone, Serialize)]
pub struct TokenView {
    pub index: usize,
    pub surface: String,
    pub space_after: bool,
    /// Highlight group (chain, singleton mention or event id); at most one per token.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mention: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etype: Option<EntityType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SentenceView {
    pub index: usize,
    pub text: String,
    pub tokens: Vec<TokenView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainView {
    pub chain_id: String,
    pub etype: EntityType,
    pub members: Vec<String>,
    /// Distinct entity descriptions along the chain.
    pub renderings: Vec<String>,
    pub color: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct DocumentView {
    pub id: String,
    pub title: String,
    pub version: u64,
    pub sentences: Vec<SentenceView>,
    pub hidden: Vec<HiddenEntityDecl>,
    pub links: Vec<EventLink>,
    pub events: Vec<Event>,
    pub chains: Vec<ChainView>,
    pub warnings: Vec<String>,
}

pub fn document_view(
    doc: &Document,
    version: u64,
    res: &Resources,
) -> Result<DocumentView, ServiceError> {
    let an = analyze(doc, res, Strictness::Strict).map_err(|e| {
        ServiceError::Rejected(crate::ops::Rejection {
            invariant: invariant_of(&e),
            message: e.to_string(),
            op_index: None,
        })
    })?;
    let chains: Vec<ChainView> = an
        .chains
        .chains
        .iter()
        .map(|c| ChainView {
            chain_id: c.chain_id.clone(),
            etype: c.etype,
            members: c.mentions.iter().map(|m| m.mention.clone()).collect(),
            renderings: c.renderings(),
            color: color_for(&c.chain_id),
        })
        .collect();
    let group_of = |mention: &str| {
        an.chains
            .chain_of(mention)
            .map(|c| c.chain_id.clone())
            .unwrap_or_else(|| mention.to_string())
    };
    let sentences =
        doc.sentences
            .iter()
            .enumerate()
            .map(|(si, s)| {
                let tokens =
                    s.tokens
                        .iter()
                        .map(|t| {
                            let mention = an.layers.mentions.iter().find(|m| {
                                m.span.sentence == si + 1 && m.span.contains_token(t.index)
                            });
                            let event = an.layers.heads.iter().find(|h| {
                                h.span.sentence == si + 1 && h.span.contains_token(t.index)
                            });
                            let group = match (mention, event) {
                                (Some(m), _) => Some(group_of(&m.id)),
                                (None, Some(h)) => Some(h.event_id.clone()),
                                (None, None) => None,
                            };
                            TokenView {
                                index: t.index,
                                surface: t.surface.clone(),
                                space_after: t.space_after(),
                                color: group.as_deref().map(color_for),
                                group,
                                mention: mention.map(|m| m.id.clone()),
                                etype: mention
                                    .map(|m| m.etype)
                                    .or(event.map(|_| EntityType::EventHead)),
                                event: event.map(|h| h.event_id.clone()),
                            }
                        })
                        .collect();
                SentenceView {
                    index: si + 1,
                    text: s.full_text(),
                    tokens,
                }
            })
            .collect();
    Ok(DocumentView {
        id: doc.doc_id.clone(),
        title: doc.title.clone(),
        version,
        sentences,
        hidden: doc.hidden_entities.clone(),
        links: doc.event_links.clone(),
        events: an.events.clone(),
        chains,
        warnings: an.warnings().to_vec(),
    })
}

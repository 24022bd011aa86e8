use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Entity type of a mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum EntityType {
    EventHead,
    Tool,
    Habitat,
    Ingredient,
}

impl EntityType {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::EventHead => "EVENT",
            EntityType::Tool => "TOOL",
            EntityType::Habitat => "HABITAT",
            EntityType::Ingredient => "INGREDIENT",
        }
    }

    /// Types that may be declared as hidden entities.
    pub fn is_hideable(self) -> bool {
        self != EntityType::EventHead
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "EVENT" | "EVENT-HEAD" => Ok(EntityType::EventHead),
            "TOOL" => Ok(EntityType::Tool),
            "HABITAT" => Ok(EntityType::Habitat),
            "INGREDIENT" => Ok(EntityType::Ingredient),
            other => Err(format!("unknown entity type `{other}`")),
        }
    }
}

/// Relation between an entity and an event head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    ParticipantOf,
    ResultOf,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::ParticipantOf => "participant-of",
            Relation::ResultOf => "result-of",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "participant-of" => Ok(Relation::ParticipantOf),
            "result-of" => Ok(Relation::ResultOf),
            other => Err(format!("unknown relation `{other}`")),
        }
    }
}

/// Hidden entity kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiddenKind {
    /// Elided argument recoverable from an earlier mention.
    Drop,
    /// Argument incorporated in the predicate meaning.
    Shadow,
}

impl HiddenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HiddenKind::Drop => "drop",
            HiddenKind::Shadow => "shadow",
        }
    }
}

impl FromStr for HiddenKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drop" => Ok(HiddenKind::Drop),
            "shadow" => Ok(HiddenKind::Shadow),
            other => Err(format!("unknown hidden subtype `{other}`")),
        }
    }
}

/// How a mention is realized in the text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Explicitness {
    Explicit,
    Drop,
    Shadow,
}

impl Explicitness {
    pub fn is_hidden(self) -> bool {
        self != Explicitness::Explicit
    }
}

impl From<HiddenKind> for Explicitness {
    fn from(kind: HiddenKind) -> Self {
        match kind {
            HiddenKind::Drop => Explicitness::Drop,
            HiddenKind::Shadow => Explicitness::Shadow,
        }
    }
}

/// Inclusive token range within one sentence. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(sentence: usize, start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span {
            sentence,
            start,
            end,
        }
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.sentence == other.sentence && self.start <= other.end && other.start <= self.end
    }

    pub fn contains_token(&self, token: usize) -> bool {
        self.start <= token && token <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Id of the explicit mention starting at `token` in `sentence` (both 1-based).
pub fn mention_id(sentence: usize, token: usize) -> String {
    format!("m_{sentence}_{token}")
}

/// Inverse of [`mention_id`].
pub fn parse_mention_id(id: &str) -> Option<(usize, usize)> {
    let rest = id.strip_prefix("m_")?;
    let (s, t) = rest.split_once('_')?;
    Some((s.parse().ok()?, t.parse().ok()?))
}

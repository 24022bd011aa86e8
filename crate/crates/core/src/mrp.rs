//! Machine-readable paraphrase codec.
//!
//! Roles ride in `{KEY:value # KEY:value}` blocks. A block directly after an
//! event head carries hidden roles; a block after an explicit entity carries
//! relational `*_OF` tags naming the head lemma. See `docs/mrp.md`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MrpKey {
    Tool,
    Habitat,
    IngrePart,
    IngreResult,
    ObjectPart,
    ObjectResult,
    Outcome,
    IngreOf,
    ResultOf,
    ObjectOf,
    ToolOf,
    HabitatOf,
}

pub const ALL_KEYS: [MrpKey; 12] = [
    MrpKey::Tool,
    MrpKey::Habitat,
    MrpKey::IngrePart,
    MrpKey::IngreResult,
    MrpKey::ObjectPart,
    MrpKey::ObjectResult,
    MrpKey::Outcome,
    MrpKey::IngreOf,
    MrpKey::ResultOf,
    MrpKey::ObjectOf,
    MrpKey::ToolOf,
    MrpKey::HabitatOf,
];

impl MrpKey {
    pub fn as_str(self) -> &'static str {
        match self {
            MrpKey::Tool => "TOOL",
            MrpKey::Habitat => "HABITAT",
            MrpKey::IngrePart => "INGRE_PART",
            MrpKey::IngreResult => "INGRE_RESULT",
            MrpKey::ObjectPart => "OBJECT_PART",
            MrpKey::ObjectResult => "OBJECT_RESULT",
            MrpKey::Outcome => "OUTCOME",
            MrpKey::IngreOf => "INGRE_OF",
            MrpKey::ResultOf => "RESULT_OF",
            MrpKey::ObjectOf => "OBJECT_OF",
            MrpKey::ToolOf => "TOOL_OF",
            MrpKey::HabitatOf => "HABITAT_OF",
        }
    }

    /// Relational keys tag explicit entities with the head they relate to.
    pub fn is_relational(self) -> bool {
        matches!(
            self,
            MrpKey::IngreOf
                | MrpKey::ResultOf
                | MrpKey::ObjectOf
                | MrpKey::ToolOf
                | MrpKey::HabitatOf
        )
    }

    /// Transfer-mode spelling of ingredient keys.
    pub fn to_transfer(self) -> MrpKey {
        match self {
            MrpKey::IngrePart => MrpKey::ObjectPart,
            MrpKey::IngreResult => MrpKey::ObjectResult,
            MrpKey::IngreOf => MrpKey::ObjectOf,
            other => other,
        }
    }
}

impl fmt::Display for MrpKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MrpKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_KEYS
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown key `{s}`"))
    }
}

pub type Pair = (MrpKey, String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MrpToken {
    Word(String),
    Block(Vec<Pair>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrpEvent {
    /// Surface of the head word.
    pub head: String,
    pub pre_block: Vec<Pair>,
    /// Relational pairs naming this head, in text order.
    pub inline_tags: Vec<Pair>,
    pub tokens: Vec<MrpToken>,
}

impl MrpEvent {
    pub fn to_text(&self) -> String {
        render_tokens(&self.tokens)
    }

    pub fn pair_count(&self) -> usize {
        self.pre_block.len() + self.inline_tags.len()
    }
}

/// Recoverable problem found while parsing; `offset` is a byte offset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrpParse {
    pub events: Vec<MrpEvent>,
    pub diagnostics: Vec<Diagnostic>,
}

fn is_punct_word(w: &str) -> bool {
    !w.is_empty()
        && w.chars()
            .all(|c| matches!(c, '.' | ',' | ';' | ':' | '!' | '?'))
}

/// Makes a value safe to place inside a block.
pub fn clean_value(value: &str) -> String {
    value
        .chars()
        .map(|c| if matches!(c, '{' | '}' | '#') { ' ' } else { c })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_block(pairs: &[Pair]) -> String {
    let inner: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    format!("{{{}}}", inner.join(" # "))
}

/// Space-joined tokens; punctuation words attach to the preceding token.
pub fn render_tokens(tokens: &[MrpToken]) -> String {
    let mut out = String::new();
    for tok in tokens {
        let piece = match tok {
            MrpToken::Word(w) => w.clone(),
            MrpToken::Block(pairs) => render_block(pairs),
        };
        let attach = matches!(tok, MrpToken::Word(w) if is_punct_word(w));
        if !out.is_empty() && !attach {
            out.push(' ');
        }
        out.push_str(&piece);
    }
    out
}

fn push_word(tokens: &mut Vec<(usize, MrpToken)>, start: usize, word: &str) {
    if word.is_empty() {
        return;
    }
    let trimmed = word.trim_end_matches(['.', ',', ';', ':', '!', '?']);
    if trimmed.len() < word.len() && trimmed.chars().any(char::is_alphanumeric) {
        tokens.push((start, MrpToken::Word(trimmed.to_string())));
        tokens.push((
            start + trimmed.len(),
            MrpToken::Word(word[trimmed.len()..].to_string()),
        ));
    } else {
        tokens.push((start, MrpToken::Word(word.to_string())));
    }
}

fn parse_block(body: &str, offset: usize, diags: &mut Vec<Diagnostic>) -> Vec<Pair> {
    let mut pairs = Vec::new();
    for raw in body.split('#') {
        let item = raw.trim();
        let Some((k, v)) = item.split_once(':') else {
            diags.push(Diagnostic {
                offset,
                message: format!("malformed pair `{item}`"),
            });
            continue;
        };
        let (k, v) = (k.trim(), v.split_whitespace().collect::<Vec<_>>().join(" "));
        match k.parse::<MrpKey>() {
            Ok(key) if !v.is_empty() => pairs.push((key, v)),
            Ok(_) => diags.push(Diagnostic {
                offset,
                message: format!("empty value for `{k}`"),
            }),
            Err(e) => diags.push(Diagnostic { offset, message: e }),
        }
    }
    pairs
}

/// Splits text into words and blocks. Malformed blocks are reported and skipped.
pub fn tokenize(text: &str) -> (Vec<MrpToken>, Vec<Diagnostic>) {
    let (tokens, diags) = lex(text);
    (tokens.into_iter().map(|(_, t)| t).collect(), diags)
}

/// Tokens with their byte offsets.
fn lex(text: &str) -> (Vec<(usize, MrpToken)>, Vec<Diagnostic>) {
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut word_start: Option<usize> = None;
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        if c == '{' {
            if let Some(s) = word_start.take() {
                push_word(&mut tokens, s, &text[s..i]);
            }
            let rest = &text[i + 1..];
            let close = rest.find('}');
            let reopen = rest.find('{');
            match (close, reopen) {
                (Some(cl), op) if op.is_none_or(|o| o > cl) => {
                    let pairs = parse_block(&rest[..cl], i, &mut diags);
                    if pairs.is_empty() {
                        diags.push(Diagnostic {
                            offset: i,
                            message: "block has no valid pairs".into(),
                        });
                    } else {
                        tokens.push((i, MrpToken::Block(pairs)));
                    }
                    i += cl + 2;
                }
                (_, reopen) => {
                    diags.push(Diagnostic {
                        offset: i,
                        message: "unclosed block".into(),
                    });
                    i = match reopen {
                        Some(o) => i + 1 + o,
                        None => text.len(),
                    };
                }
            }
            continue;
        }
        if c == '}' {
            if let Some(s) = word_start.take() {
                push_word(&mut tokens, s, &text[s..i]);
            }
            diags.push(Diagnostic {
                offset: i,
                message: "unmatched `}`".into(),
            });
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            if let Some(s) = word_start.take() {
                push_word(&mut tokens, s, &text[s..i]);
            }
        } else if word_start.is_none() {
            word_start = Some(i);
        }
        i += c.len_utf8();
    }
    if let Some(s) = word_start {
        push_word(&mut tokens, s, &text[s..]);
    }
    (tokens, diags)
}

fn is_pre_block(pairs: &[Pair]) -> bool {
    pairs.iter().any(|(k, _)| !k.is_relational())
}

/// Parses MRP text into events. Never fails; problems become diagnostics.
pub fn parse_mrp(text: &str) -> MrpParse {
    let (lexed, mut diagnostics) = lex(text);
    let offsets: Vec<usize> = lexed.iter().map(|(o, _)| *o).collect();
    let tokens: Vec<MrpToken> = lexed.into_iter().map(|(_, t)| t).collect();
    let word = |i: usize| match &tokens[i] {
        MrpToken::Word(w) => Some(w.as_str()),
        MrpToken::Block(_) => None,
    };
    let mut heads: BTreeSet<usize> = BTreeSet::new();
    for (i, tok) in tokens.iter().enumerate() {
        if let MrpToken::Block(pairs) = tok {
            if !is_pre_block(pairs) {
                continue;
            }
            if pairs.iter().any(|(k, _)| k.is_relational()) {
                diagnostics.push(Diagnostic {
                    offset: offsets[i],
                    message: "block mixes head and relational keys".into(),
                });
            }
            match i.checked_sub(1).and_then(word) {
                Some(_) => {
                    heads.insert(i - 1);
                }
                None => diagnostics.push(Diagnostic {
                    offset: offsets[i],
                    message: "head block does not follow a word".into(),
                }),
            }
        }
    }
    // (block index, pair, resolved head)
    let mut inline: Vec<(usize, Pair, usize)> = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let MrpToken::Block(pairs) = tok else {
            continue;
        };
        if is_pre_block(pairs) {
            continue;
        }
        for (k, v) in pairs {
            let target = v.to_lowercase();
            let matches = |j: &usize| word(*j).is_some_and(|w| w.to_lowercase() == target);
            let before = (0..i).rev().filter(|j| heads.contains(j)).find(matches);
            let found = before
                .or_else(|| (0..i).rev().find(matches))
                .or_else(|| (i + 1..tokens.len()).find(matches));
            match found {
                Some(j) => {
                    heads.insert(j);
                    inline.push((i, (*k, v.clone()), j));
                }
                None => diagnostics.push(Diagnostic {
                    offset: offsets[i],
                    message: format!("no head word matches `{v}`"),
                }),
            }
        }
    }
    if heads.is_empty() {
        if let Some(first) = (0..tokens.len()).find(|&i| word(i).is_some()) {
            heads.insert(first);
        }
    }
    let heads: Vec<usize> = heads.into_iter().collect();
    let mut events = Vec::with_capacity(heads.len());
    for (n, &h) in heads.iter().enumerate() {
        let start = if n == 0 { 0 } else { h };
        let end = heads.get(n + 1).copied().unwrap_or(tokens.len());
        let pre_block = match tokens.get(h + 1) {
            Some(MrpToken::Block(pairs)) if is_pre_block(pairs) => pairs.clone(),
            _ => Vec::new(),
        };
        events.push(MrpEvent {
            head: word(h).unwrap_or("").to_string(),
            pre_block,
            inline_tags: inline
                .iter()
                .filter(|(_, _, j)| *j == h)
                .map(|(_, p, _)| p.clone())
                .collect(),
            tokens: tokens[start..end].to_vec(),
        });
    }
    MrpParse {
        events,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHOP_LINE: &str =
        "Chop {TOOL:knife # HABITAT:cutting board # OUTCOME:chopped onions} onions {INGRE_OF:chop}";

    #[test]
    fn canonical_line() {
        let parsed = parse_mrp(CHOP_LINE);
        assert!(parsed.diagnostics.is_empty());
        assert_eq!(parsed.events.len(), 1);
        let ev = &parsed.events[0];
        assert_eq!(ev.head, "Chop");
        assert_eq!(ev.pre_block.len(), 3);
        assert_eq!(ev.inline_tags, vec![(MrpKey::IngreOf, "chop".to_string())]);
        assert_eq!(ev.to_text(), CHOP_LINE);
    }

    #[test]
    fn plain_text_is_one_event() {
        let parsed = parse_mrp("Chop onions");
        assert_eq!(parsed.events.len(), 1);
        assert_eq!(parsed.events[0].pair_count(), 0);
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn unclosed_block() {
        let parsed = parse_mrp("{TOOL:knife");
        assert_eq!(
            parsed
                .events
                .iter()
                .map(MrpEvent::pair_count)
                .sum::<usize>(),
            0
        );
        assert_eq!(parsed.diagnostics.len(), 1);
    }

    #[test]
    fn bad_pair_is_skipped() {
        let parsed = parse_mrp("Chop {TOOL:knife # COLOR:red} onions");
        assert_eq!(
            parsed.events[0].pre_block,
            vec![(MrpKey::Tool, "knife".to_string())]
        );
        assert_eq!(parsed.diagnostics.len(), 1);
    }

    #[test]
    fn two_events() {
        let text = "Peel {TOOL:peeler # OUTCOME:peeled apples} and cut {TOOL:knife} apples {INGRE_OF:peel # INGRE_OF:cut}.";
        let parsed = parse_mrp(text);
        assert_eq!(parsed.events.len(), 2);
        assert_eq!(parsed.events[0].head, "Peel");
        assert_eq!(parsed.events[1].head, "cut");
        assert_eq!(parsed.events[0].inline_tags.len(), 1);
        assert_eq!(parsed.events[1].inline_tags.len(), 1);
        let rebuilt: Vec<MrpToken> = parsed
            .events
            .iter()
            .flat_map(|e| e.tokens.clone())
            .collect();
        assert_eq!(render_tokens(&rebuilt), text);
    }
}

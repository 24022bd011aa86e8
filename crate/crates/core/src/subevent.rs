//! End-state classification and begin/end entity redescription.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_SENSES: &str = include_str!("../data/senses.tsv");
const DEFAULT_PARTICIPLES: &str = include_str!("../data/participles.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndStateClass {
    Transformation,
    LocationChange,
    Neither,
}

impl EndStateClass {
    pub fn as_tsv(self) -> &'static str {
        match self {
            EndStateClass::Transformation => "TRANSFORMATION",
            EndStateClass::LocationChange => "LOCATION_CHANGE",
            EndStateClass::Neither => "NONE",
        }
    }
}

impl fmt::Display for EndStateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_tsv())
    }
}

/// Reads `KEY\tVALUE` rows, skipping blanks and `#` comments.
pub(crate) fn read_tsv<'a>(
    text: &'a str,
    source: &str,
    columns: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != columns || cols.iter().any(|c| c.is_empty()) {
            return Err(Error::Table {
                source_name: source.to_string(),
                line: i + 1,
                reason: format!("expected {columns} non-empty tab-separated columns"),
            });
        }
        rows.push((i + 1, cols));
    }
    Ok(rows)
}

/// Where a table was loaded from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableSource {
    Embedded,
    User(String),
}

/// Verb-sense to end-state class map. Unknown senses are `Neither`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseTable {
    entries: HashMap<String, EndStateClass>,
    pub source: TableSource,
}

impl Default for SenseTable {
    fn default() -> Self {
        let mut table = SenseTable::from_tsv(DEFAULT_SENSES, "senses.tsv")
            .expect("embedded sense table is valid");
        table.source = TableSource::Embedded;
        table
    }
}

impl SenseTable {
    pub fn from_tsv(text: &str, source: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (line, cols) in read_tsv(text, source, 2)? {
            let class = match cols[1] {
                "TRANSFORMATION" => EndStateClass::Transformation,
                "LOCATION_CHANGE" => EndStateClass::LocationChange,
                "NONE" => EndStateClass::Neither,
                other => {
                    return Err(Error::Table {
                        source_name: source.to_string(),
                        line,
                        reason: format!("unknown category `{other}`"),
                    })
                }
            };
            entries.insert(cols[0].to_uppercase(), class);
        }
        Ok(SenseTable {
            entries,
            source: TableSource::User(source.to_string()),
        })
    }

    pub fn classify(&self, frame: &str) -> EndStateClass {
        self.entries
            .get(&frame.trim().to_uppercase())
            .copied()
            .unwrap_or(EndStateClass::Neither)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, sense: &str, class: EndStateClass) {
        self.entries.insert(sense.to_uppercase(), class);
    }
}

pub fn classify_end_state(frame: &str, table: &SenseTable) -> EndStateClass {
    table.classify(frame)
}

/// Rule-based English inflector with an irregular participle table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inflector {
    exceptions: HashMap<String, String>,
}

impl Default for Inflector {
    fn default() -> Self {
        Inflector::from_tsv(DEFAULT_PARTICIPLES, "participles.tsv")
            .expect("embedded participle table is valid")
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'é')
}

/// One vowel group ending consonant-vowel-consonant, last consonant not w/x/y.
fn doubles_final(word: &str) -> bool {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    if n < 3 {
        return false;
    }
    let (a, b, c) = (chars[n - 3], chars[n - 2], chars[n - 1]);
    if is_vowel(a) || !is_vowel(b) || is_vowel(c) || matches!(c, 'w' | 'x' | 'y') {
        return false;
    }
    if a == 'u' && n >= 4 && chars[n - 4] == 'q' {
        return false;
    }
    let mut groups = 0;
    let mut prev = false;
    for &ch in &chars {
        let v = is_vowel(ch);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    groups == 1
}

impl Inflector {
    pub fn from_tsv(text: &str, source: &str) -> Result<Self> {
        let exceptions = read_tsv(text, source, 2)?
            .into_iter()
            .map(|(_, cols)| (cols[0].to_lowercase(), cols[1].to_string()))
            .collect();
        Ok(Inflector { exceptions })
    }

    /// Past participle of a lemma. Multiword lemmas inflect the first word.
    pub fn participle(&self, lemma: &str) -> String {
        let lemma = lemma.trim();
        if let Some((first, rest)) = lemma.split_once(' ') {
            return format!("{} {rest}", self.participle(first));
        }
        let word = lemma.to_lowercase();
        if let Some(p) = self.exceptions.get(&word) {
            return p.clone();
        }
        if word.is_empty() {
            return word;
        }
        if word.ends_with('é') {
            return format!("{word}ed");
        }
        if word.ends_with('e') {
            return format!("{word}d");
        }
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        if n >= 2 && chars[n - 1] == 'y' && !is_vowel(chars[n - 2]) {
            return format!("{}ied", &word[..word.len() - 1]);
        }
        if doubles_final(&word) {
            return format!("{word}{}ed", chars[n - 1]);
        }
        format!("{word}ed")
    }

    /// Present participle, as in "by sprinkling".
    pub fn gerund(&self, lemma: &str) -> String {
        let lemma = lemma.trim();
        if let Some((first, rest)) = lemma.split_once(' ') {
            return format!("{} {rest}", self.gerund(first));
        }
        let word = lemma.to_lowercase();
        if word.ends_with("ie") {
            return format!("{}ying", &word[..word.len() - 2]);
        }
        if word.ends_with("ee") || word.ends_with("ye") || word.ends_with("oe") || word == "be" {
            return format!("{word}ing");
        }
        if let Some(stem) = word.strip_suffix('e') {
            if !stem.is_empty() {
                return format!("{stem}ing");
            }
        }
        if doubles_final(&word) {
            let last = word.chars().last().unwrap();
            return format!("{word}{last}ing");
        }
        format!("{word}ing")
    }
}

/// Description of an entity at one point in the event sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityState {
    pub base: String,
    /// Participle markers in application order (oldest first).
    pub applied_states: Vec<String>,
    pub location: Option<String>,
    /// Begin-state marker (`un` + participle) shown outermost when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending: Option<String>,
}

impl EntityState {
    pub fn new(base: impl Into<String>) -> Self {
        EntityState {
            base: base.into(),
            applied_states: Vec::new(),
            location: None,
            pending: None,
        }
    }

    /// Appends a marker unless it repeats the latest one.
    pub fn apply(&mut self, marker: &str) {
        if self.applied_states.last().map(String::as_str) != Some(marker) {
            self.applied_states.push(marker.to_string());
        }
    }

    /// Latest state outermost: ["chopped", "sautéed"] + onions -> "sautéed chopped onions".
    pub fn render(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if let Some(p) = &self.pending {
            parts.push(p);
        }
        parts.extend(self.applied_states.iter().rev().map(String::as_str));
        parts.push(&self.base);
        parts.retain(|p| !p.is_empty());
        parts.join(" ")
    }

    /// Same state without the begin marker.
    pub fn settled(&self) -> EntityState {
        EntityState {
            pending: None,
            ..self.clone()
        }
    }
}

impl fmt::Display for EntityState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Keeps the `k` most recent applied states.
pub fn truncate_states(state: &EntityState, k: usize) -> EntityState {
    let n = state.applied_states.len();
    let mut out = state.clone();
    if n > k {
        out.applied_states = state.applied_states[n - k..].to_vec();
    }
    out
}

/// A chain's location as of an event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationFact {
    pub entity: String,
    pub habitat: String,
    pub effective_from: String,
}

/// Begin and end descriptions of one entity across one event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub begin: EntityState,
    pub end: EntityState,
    pub warning: Option<String>,
}

/// Applies one event to an incoming state.
///
/// Transformation appends the participle and marks the begin state with `un`;
/// LocationChange moves the entity to `habitat`; Neither is the identity.
pub fn transition(
    class: EndStateClass,
    lemma: &str,
    habitat: Option<&str>,
    state_in: &EntityState,
    inflector: &Inflector,
) -> Transition {
    let state_in = state_in.settled();
    match class {
        EndStateClass::Transformation => {
            let p = inflector.participle(lemma);
            let mut begin = state_in.clone();
            begin.pending = Some(format!("un{p}"));
            let mut end = state_in;
            end.apply(&p);
            Transition {
                begin,
                end,
                warning: None,
            }
        }
        EndStateClass::LocationChange => {
            let mut end = state_in.clone();
            let warning = match habitat {
                Some(h) => {
                    end.location = Some(h.to_string());
                    None
                }
                None => Some(format!(
                    "location change `{lemma}` has no habitat; location unchanged"
                )),
            };
            Transition {
                begin: state_in,
                end,
                warning,
            }
        }
        EndStateClass::Neither => Transition {
            begin: state_in.clone(),
            end: state_in,
            warning: None,
        },
    }
}

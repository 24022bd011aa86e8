//! Corpus statistics per split: sizes, entity counts and chain counts.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::conllu::Document;
use crate::coref::Strictness;
use crate::error::{Error, Result};
use crate::pipeline::{analyze, Resources};
use crate::types::{EntityType, Relation};

pub const SPLITS: [&str; 3] = ["train", "dev", "test"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub avg: f64,
    pub max: usize,
    pub min: usize,
}

impl Summary {
    fn of(values: &[usize]) -> Summary {
        if values.is_empty() {
            return Summary {
                avg: 0.0,
                max: 0,
                min: 0,
            };
        }
        Summary {
            avg: values.iter().sum::<usize>() as f64 / values.len() as f64,
            max: *values.iter().max().unwrap(),
            min: *values.iter().min().unwrap(),
        }
    }
}

/// Entity rows: EVENT, TOOL, HABITAT, INGREDIENT (participant) and INGREDIENT (result).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityRow {
    Event,
    Tool,
    Habitat,
    IngredientParticipant,
    IngredientResult,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitHidden {
    pub explicit: usize,
    pub hidden: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub split: String,
    pub recipes: usize,
    /// Sentences per recipe.
    pub sentences: Summary,
    /// Non-punctuation tokens per sentence.
    pub sentence_length: Summary,
    pub entities: BTreeMap<EntityRow, ExplicitHidden>,
    /// Chains with at least two mentions, per entity type name.
    pub chains: BTreeMap<String, usize>,
    /// Chains with at least two mentions of any type.
    pub chains_all: usize,
    /// Chains with at least two explicit mentions.
    pub chains_all_explicit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub splits: Vec<SplitStats>,
}

impl CorpusStats {
    pub fn split(&self, name: &str) -> Result<&SplitStats> {
        self.splits
            .iter()
            .find(|s| s.split == name)
            .ok_or_else(|| Error::UnknownSplit(name.to_string()))
    }
}

/// Reads a `doc_id<TAB>split` manifest; split names must be train, dev or test.
pub fn read_split_manifest(text: &str) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((doc, split)) = line.split_once('\t') else {
            return Err(Error::Table {
                source_name: "split manifest".into(),
                line: i + 1,
                reason: "expected `doc_id<TAB>split`".into(),
            });
        };
        let split = split.trim();
        if !SPLITS.contains(&split) {
            return Err(Error::UnknownSplit(split.to_string()));
        }
        out.insert(doc.trim().to_string(), split.to_string());
    }
    Ok(out)
}

/// Groups documents by the manifest; every document must be listed.
pub fn assign_splits<'d>(
    docs: &'d [Document],
    manifest: &HashMap<String, String>,
) -> Result<Vec<(String, Vec<&'d Document>)>> {
    let mut groups: BTreeMap<usize, (String, Vec<&Document>)> = BTreeMap::new();
    for d in docs {
        let split = manifest
            .get(&d.doc_id)
            .ok_or_else(|| Error::InvalidDocument {
                doc: d.doc_id.clone(),
                reason: "document missing from split manifest".into(),
            })?;
        let rank = SPLITS
            .iter()
            .position(|s| s == split)
            .expect("manifest splits are checked");
        groups
            .entry(rank)
            .or_insert_with(|| (split.clone(), Vec::new()))
            .1
            .push(d);
    }
    Ok(groups.into_values().collect())
}

fn row(etype: EntityType, relation: Relation) -> EntityRow {
    match (etype, relation) {
        (EntityType::EventHead, _) => EntityRow::Event,
        (EntityType::Tool, _) => EntityRow::Tool,
        (EntityType::Habitat, _) => EntityRow::Habitat,
        (EntityType::Ingredient, Relation::ResultOf) => EntityRow::IngredientResult,
        (EntityType::Ingredient, Relation::ParticipantOf) => EntityRow::IngredientParticipant,
    }
}

pub fn split_stats(name: &str, docs: &[&Document], res: &Resources) -> Result<SplitStats> {
    let mut sentence_counts = Vec::new();
    let mut lengths = Vec::new();
    let mut entities: BTreeMap<EntityRow, ExplicitHidden> = BTreeMap::new();
    let mut chains: BTreeMap<String, usize> = BTreeMap::new();
    let mut chains_all = 0;
    let mut chains_all_explicit = 0;
    for doc in docs {
        sentence_counts.push(doc.sentences.len());
        for s in &doc.sentences {
            lengths.push(s.tokens.iter().filter(|t| !t.is_punct()).count());
        }
        let an = analyze(doc, res, Strictness::Strict)?;
        // an ingredient is a result if any event names it as one
        let results: HashSet<&str> = an
            .events
            .iter()
            .flat_map(|e| e.participants.iter())
            .filter(|p| p.relation == Relation::ResultOf)
            .map(|p| p.mention.id.as_str())
            .collect();
        let rel = |id: &str| {
            if results.contains(id) {
                Relation::ResultOf
            } else {
                Relation::ParticipantOf
            }
        };
        for m in &an.layers.mentions {
            entities
                .entry(row(m.etype, rel(&m.id)))
                .or_default()
                .explicit += 1;
        }
        entities.entry(EntityRow::Event).or_default().explicit += an.layers.heads.len();
        for h in &doc.hidden_entities {
            entities
                .entry(row(h.etype, rel(&h.hid)))
                .or_default()
                .hidden += 1;
        }
        let hidden: HashSet<&str> = doc.hidden_entities.iter().map(|h| h.hid.as_str()).collect();
        for c in &an.chains.membership.chains {
            if c.members.len() < 2 {
                continue;
            }
            *chains.entry(c.etype.to_string()).or_default() += 1;
            chains_all += 1;
            if c.members
                .iter()
                .filter(|m| !hidden.contains(m.as_str()))
                .count()
                >= 2
            {
                chains_all_explicit += 1;
            }
        }
    }
    Ok(SplitStats {
        split: name.to_string(),
        recipes: docs.len(),
        sentences: Summary::of(&sentence_counts),
        sentence_length: Summary::of(&lengths),
        entities,
        chains,
        chains_all,
        chains_all_explicit,
    })
}

/// Statistics for each `(split, documents)` group, in the order given.
pub fn corpus_stats(groups: &[(String, Vec<&Document>)], res: &Resources) -> Result<CorpusStats> {
    let splits = groups
        .iter()
        .map(|(name, docs)| split_stats(name, docs, res))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorpusStats { splits })
}

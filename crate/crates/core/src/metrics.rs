//! Scores: extractive QA, Cohen's kappa, coreference (MUC, B³, CEAF-e) and MRP pairs.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mrp::{parse_mrp, MrpKey};
use crate::pipeline::Analysis;

/// Precision, recall and F1; F1 is 0 when both are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    /// Ratio with a zero denominator scored as 0.
    fn from_counts(p_num: f64, p_den: f64, r_num: f64, r_den: f64) -> Self {
        let div = |n: f64, d: f64| if d == 0.0 { 0.0 } else { n / d };
        Prf::new(div(p_num, p_den), div(r_num, r_den))
    }
}

// ---------------------------------------------------------------- QA

/// Lowercase, strip punctuation and articles, collapse whitespace.
pub fn normalize_answer(s: &str) -> String {
    let lower = s.to_lowercase();
    let no_punct: String = lower
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    no_punct
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn exact_match(prediction: &str, gold: &str) -> bool {
    normalize_answer(prediction) == normalize_answer(gold)
}

/// Token-overlap F1 over normalized answers; empty answers only match each other.
pub fn qa_f1(prediction: &str, gold: &str) -> f64 {
    let p = normalize_answer(prediction);
    let g = normalize_answer(gold);
    let pt: Vec<&str> = p.split_whitespace().collect();
    let gt: Vec<&str> = g.split_whitespace().collect();
    if pt.is_empty() || gt.is_empty() {
        return if pt == gt { 1.0 } else { 0.0 };
    }
    let mut counts: HashMap<&str, i64> = HashMap::new();
    for t in &gt {
        *counts.entry(t).or_default() += 1;
    }
    let mut common = 0usize;
    for t in &pt {
        if let Some(c) = counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    Prf::new(
        common as f64 / pt.len() as f64,
        common as f64 / gt.len() as f64,
    )
    .f1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaScores {
    pub exact_match: f64,
    pub f1: f64,
    pub count: usize,
}

/// Mean EM and F1; each prediction takes its best gold answer.
pub fn qa_scores(pairs: &[(String, Vec<String>)]) -> Result<QaScores> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut em = 0.0;
    let mut f1 = 0.0;
    for (pred, golds) in pairs {
        em += golds.iter().any(|g| exact_match(pred, g)) as u8 as f64;
        f1 += golds.iter().map(|g| qa_f1(pred, g)).fold(0.0, f64::max);
    }
    let n = pairs.len() as f64;
    Ok(QaScores {
        exact_match: em / n,
        f1: f1 / n,
        count: pairs.len(),
    })
}

// ---------------------------------------------------------------- kappa

/// Cohen's kappa between two annotators; 1 when chance agreement is already 1.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ca: HashMap<&T, f64> = HashMap::new();
    let mut cb: HashMap<&T, f64> = HashMap::new();
    for x in a {
        *ca.entry(x).or_default() += 1.0;
    }
    for y in b {
        *cb.entry(y).or_default() += 1.0;
    }
    let expected: f64 = ca
        .iter()
        .map(|(k, c)| c * cb.get(k).copied().unwrap_or(0.0))
        .sum::<f64>()
        / (n * n);
    if (1.0 - expected).abs() < f64::EPSILON {
        return Ok(1.0);
    }
    Ok((observed - expected) / (1.0 - expected))
}

// ---------------------------------------------------------------- coreference

/// A clustering: each inner vector is one entity's mentions.
pub type Clusters = Vec<Vec<String>>;

fn cluster_index(clusters: &Clusters) -> HashMap<&str, usize> {
    let mut out = HashMap::new();
    for (i, c) in clusters.iter().enumerate() {
        for m in c {
            out.insert(m.as_str(), i);
        }
    }
    out
}

/// Rejects a mention listed in two clusters of one clustering.
pub fn check_clusters(clusters: &Clusters) -> Result<()> {
    let mut seen = HashSet::new();
    for m in clusters.iter().flatten() {
        if !seen.insert(m.as_str()) {
            return Err(Error::DuplicateMention(m.clone()));
        }
    }
    Ok(())
}

/// MUC partition count: links in `k` kept by the partition `other` induces.
fn muc_side(key: &Clusters, response: &Clusters) -> (f64, f64) {
    let idx = cluster_index(response);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in key {
        // mentions absent from the response form singleton parts
        let mut parts: HashSet<Option<usize>> = HashSet::new();
        let mut missing = 0usize;
        for m in k {
            match idx.get(m.as_str()) {
                Some(&i) => {
                    parts.insert(Some(i));
                }
                None => missing += 1,
            }
        }
        let p = parts.len() + missing;
        num += (k.len() - p) as f64;
        den += (k.len() - 1) as f64;
    }
    (num, den)
}

pub fn muc(key: &Clusters, response: &Clusters) -> Prf {
    let (rn, rd) = muc_side(key, response);
    let (pn, pd) = muc_side(response, key);
    Prf::from_counts(pn, pd, rn, rd)
}

fn b3_side(key: &Clusters, response: &Clusters) -> (f64, f64) {
    let idx = cluster_index(response);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in key {
        let kset: HashSet<&str> = k.iter().map(String::as_str).collect();
        for m in k {
            den += 1.0;
            if let Some(&ri) = idx.get(m.as_str()) {
                let overlap = response[ri]
                    .iter()
                    .filter(|x| kset.contains(x.as_str()))
                    .count();
                num += overlap as f64 / k.len() as f64;
            }
        }
    }
    (num, den)
}

pub fn b_cubed(key: &Clusters, response: &Clusters) -> Prf {
    let (rn, rd) = b3_side(key, response);
    let (pn, pd) = b3_side(response, key);
    Prf::from_counts(pn, pd, rn, rd)
}

/// Entity similarity 2|K∩R| / (|K|+|R|).
pub fn phi4(k: &[String], r: &[String]) -> f64 {
    let ks: HashSet<&str> = k.iter().map(String::as_str).collect();
    let common = r.iter().filter(|m| ks.contains(m.as_str())).count();
    if k.is_empty() && r.is_empty() {
        return 0.0;
    }
    2.0 * common as f64 / (k.len() + r.len()) as f64
}

/// Maximum-weight assignment on a rectangular matrix; returns the best total.
pub fn max_assignment(weights: &[Vec<f64>]) -> f64 {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let n = rows.max(cols);
    let max_w = weights.iter().flatten().copied().fold(0.0, f64::max);
    // square cost matrix for minimisation, padded with zero-weight cells
    let cost = |i: usize, j: usize| -> f64 {
        let w = if i < rows && j < cols {
            weights[i][j]
        } else {
            0.0
        };
        max_w - w
    };
    // Hungarian algorithm with potentials, 1-based internal indices.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0.0;
    for (j, &pj) in p.iter().enumerate().skip(1) {
        let (i, jj) = (pj - 1, j - 1);
        if i < rows && jj < cols {
            total += weights[i][jj];
        }
    }
    total
}

pub fn ceaf_e(key: &Clusters, response: &Clusters) -> Prf {
    let weights: Vec<Vec<f64>> = key
        .iter()
        .map(|k| response.iter().map(|r| phi4(k, r)).collect())
        .collect();
    let sim = max_assignment(&weights);
    Prf::from_counts(sim, response.len() as f64, sim, key.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorefScores {
    pub muc: Prf,
    pub b_cubed: Prf,
    pub ceaf_e: Prf,
    /// Mean of the three F1 values.
    pub conll_f1: f64,
}

pub fn coref_scores(key: &Clusters, response: &Clusters) -> Result<CorefScores> {
    check_clusters(key)?;
    check_clusters(response)?;
    let muc = muc(key, response);
    let b_cubed = b_cubed(key, response);
    let ceaf_e = ceaf_e(key, response);
    Ok(CorefScores {
        muc,
        b_cubed,
        ceaf_e,
        conll_f1: (muc.f1 + b_cubed.f1 + ceaf_e.f1) / 3.0,
    })
}

/// Clusters of one analysed document, keyed for comparison across annotators.
///
/// Explicit mentions are keyed by span and hidden ones by anchor event, type and
/// lowercased label; keys carry the document id so corpora concatenate safely.
pub fn document_clusters(an: &Analysis) -> Clusters {
    let doc = &an.doc.doc_id;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut key = |id: &str| {
        let base = match (an.doc.hidden(id), an.layers.mention(id)) {
            (Some(h), _) => format!(
                "{doc}/{}/{}/{}",
                h.anchor_event,
                h.etype,
                normalize_value(&h.label)
            ),
            (None, Some(m)) => {
                format!("{doc}/s{}:{}-{}", m.span.sentence, m.span.start, m.span.end)
            }
            (None, None) => format!("{doc}/{id}"),
        };
        // identical hidden keys on one event stay distinct mentions
        let n = seen.entry(base.clone()).or_default();
        *n += 1;
        if *n == 1 {
            base
        } else {
            format!("{base}#{n}")
        }
    };
    an.chains
        .chains
        .iter()
        .map(|c| c.mentions.iter().map(|m| key(&m.mention)).collect())
        .collect()
}

// ---------------------------------------------------------------- MRP

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MrpCategory {
    Tool,
    Habitat,
    IngredientParticipant,
    IngredientResult,
}

pub const MRP_CATEGORIES: [MrpCategory; 4] = [
    MrpCategory::Tool,
    MrpCategory::Habitat,
    MrpCategory::IngredientParticipant,
    MrpCategory::IngredientResult,
];

pub fn category(key: MrpKey) -> MrpCategory {
    match key {
        MrpKey::Tool | MrpKey::ToolOf => MrpCategory::Tool,
        MrpKey::Habitat | MrpKey::HabitatOf => MrpCategory::Habitat,
        MrpKey::IngrePart | MrpKey::ObjectPart | MrpKey::IngreOf | MrpKey::ObjectOf => {
            MrpCategory::IngredientParticipant
        }
        MrpKey::IngreResult | MrpKey::ObjectResult | MrpKey::Outcome | MrpKey::ResultOf => {
            MrpCategory::IngredientResult
        }
    }
}

/// How strictly hidden pre-block pairs must agree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// Key and category must match; the value is ignored.
    Role,
    /// Key, category and normalized value must match.
    #[default]
    Exact,
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "role" => Ok(Granularity::Role),
            "exact" => Ok(Granularity::Exact),
            other => Err(format!(
                "unknown granularity `{other}` (expected role or exact)"
            )),
        }
    }
}

/// Identity of one scored pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PairKey {
    line: usize,
    head: String,
    occurrence: usize,
    hidden: bool,
    category: MrpCategory,
    /// Normalized value for hidden pairs; relational pairs compare by position only.
    value: Option<String>,
}

fn normalize_value(v: &str) -> String {
    v.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn pair_bag(text: &str, granularity: Granularity) -> HashMap<PairKey, usize> {
    let mut bag = HashMap::new();
    for (line_no, line) in text.lines().enumerate() {
        let parsed = parse_mrp(line);
        let mut seen: HashMap<String, usize> = HashMap::new();
        for ev in parsed.events {
            let head = ev.head.to_lowercase();
            let occ = seen.entry(head.clone()).or_default();
            let occurrence = *occ;
            *occ += 1;
            let mut push = |key: MrpKey, value: Option<String>, hidden: bool| {
                *bag.entry(PairKey {
                    line: line_no,
                    head: head.clone(),
                    occurrence,
                    hidden,
                    category: category(key),
                    value,
                })
                .or_insert(0) += 1;
            };
            for (k, v) in &ev.pre_block {
                let value = match granularity {
                    Granularity::Exact => Some(normalize_value(v)),
                    Granularity::Role => None,
                };
                push(*k, value, true);
            }
            for (k, _) in &ev.inline_tags {
                push(*k, None, false);
            }
        }
    }
    bag
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub category: MrpCategory,
    pub gold: usize,
    pub system: usize,
    pub matched: usize,
    pub prf: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrpScores {
    pub categories: Vec<CategoryScore>,
    pub overall: CategoryTotals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryTotals {
    pub gold: usize,
    pub system: usize,
    pub matched: usize,
    pub prf: Prf,
}

/// With no gold and no system pairs a category scores 1/1/1; no system pairs otherwise gives P = 0.
fn score_counts(gold: usize, system: usize, matched: usize) -> Prf {
    if gold == 0 && system == 0 {
        return Prf::new(1.0, 1.0);
    }
    Prf::from_counts(matched as f64, system as f64, matched as f64, gold as f64)
}

/// Line-aligned pair scoring of system MRP against gold MRP at exact granularity.
pub fn mrp_scores(gold: &str, system: &str) -> MrpScores {
    mrp_scores_at(gold, system, Granularity::Exact)
}

pub fn mrp_scores_at(gold: &str, system: &str, granularity: Granularity) -> MrpScores {
    let g = pair_bag(gold, granularity);
    let s = pair_bag(system, granularity);
    let mut categories = Vec::new();
    let (mut tg, mut ts, mut tm) = (0, 0, 0);
    for cat in MRP_CATEGORIES {
        let gold_n: usize = g
            .iter()
            .filter(|(k, _)| k.category == cat)
            .map(|(_, c)| c)
            .sum();
        let sys_n: usize = s
            .iter()
            .filter(|(k, _)| k.category == cat)
            .map(|(_, c)| c)
            .sum();
        let matched: usize = g
            .iter()
            .filter(|(k, _)| k.category == cat)
            .map(|(k, c)| (*c).min(s.get(k).copied().unwrap_or(0)))
            .sum();
        tg += gold_n;
        ts += sys_n;
        tm += matched;
        categories.push(CategoryScore {
            category: cat,
            gold: gold_n,
            system: sys_n,
            matched,
            prf: score_counts(gold_n, sys_n, matched),
        });
    }
    MrpScores {
        categories,
        overall: CategoryTotals {
            gold: tg,
            system: ts,
            matched: tm,
            prf: score_counts(tg, ts, tm),
        },
    }
}

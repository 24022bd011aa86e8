//! Plain-text renderings of command results.

use std::collections::BTreeSet;
use std::fmt::Write;

use densepara::coref::CorefChain;
use densepara::events::Event;
use densepara::metrics::{CorefScores, Granularity, MrpScores, Prf, QaScores};
use densepara::stats::{CorpusStats, EntityRow};
use densepara::types::Explicitness;

fn explicitness(e: Explicitness) -> &'static str {
    match e {
        Explicitness::Explicit => "explicit",
        Explicitness::Drop => "drop",
        Explicitness::Shadow => "shadow",
    }
}

pub fn event(doc_id: &str, ev: &Event) -> String {
    let mut out = format!(
        "{doc_id} {} s{} {} [{}] \"{}\"\n",
        ev.event_id, ev.sentence, ev.lemma, ev.frame, ev.head.label
    );
    for p in &ev.participants {
        let m = &p.mention;
        let _ = write!(
            out,
            "  {} {} {} {} \"{}\"",
            p.relation,
            m.etype,
            m.id,
            explicitness(m.explicitness),
            m.label
        );
        if let Some(role) = &m.role {
            let _ = write!(out, " role={role}");
        }
        out.push('\n');
    }
    for m in &ev.modifiers {
        let _ = writeln!(out, "  modifier {} \"{}\"", m.role, m.text);
    }
    out
}

pub fn chain(doc_id: &str, c: &CorefChain) -> String {
    let members: Vec<String> = c
        .mentions
        .iter()
        .map(|m| match &m.event {
            Some(ev) => format!("{}@{ev}", m.mention),
            None => m.mention.clone(),
        })
        .collect();
    let mut out = format!(
        "{doc_id} {} {}{} [{}]\n",
        c.chain_id,
        c.etype,
        if c.declared { "" } else { " singleton" },
        members.join(", ")
    );
    for s in &c.timeline {
        let at = s.event.as_deref().unwrap_or("initial");
        let _ = write!(out, "  {at}: {}", s.state.render());
        if let Some(loc) = &s.state.location {
            let _ = write!(out, " (in {loc})");
        }
        if s.rebased {
            out.push_str(" *");
        }
        out.push('\n');
    }
    out
}

/// Left-aligned first column, right-aligned numeric columns.
fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, cell) in r.iter().enumerate().take(cols) {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i == 0 {
                let _ = write!(s, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(s, "  {cell:>w$}", w = widths[i]);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    for r in rows {
        out += &line(r);
    }
    out
}

fn prf_row(name: &str, p: &Prf) -> Vec<String> {
    vec![
        name.to_string(),
        format!("{:.4}", p.precision),
        format!("{:.4}", p.recall),
        format!("{:.4}", p.f1),
    ]
}

fn prf_header(first: &str) -> Vec<String> {
    [first, "P", "R", "F1"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

pub fn qa(scores: &QaScores, missing: usize) -> String {
    format!(
        "items {}  missing {}  exact_match {:.4}  f1 {:.4}\n",
        scores.count, missing, scores.exact_match, scores.f1
    )
}

pub fn coref(overall: &CorefScores, documents: &[(String, CorefScores)]) -> String {
    let rows = vec![
        prf_row("muc", &overall.muc),
        prf_row("b_cubed", &overall.b_cubed),
        prf_row("ceaf_e", &overall.ceaf_e),
    ];
    let mut out = table(&prf_header("metric"), &rows);
    let _ = writeln!(out, "conll_f1 {:.4}", overall.conll_f1);
    if !documents.is_empty() {
        out.push('\n');
        let header: Vec<String> = ["document", "muc", "b_cubed", "ceaf_e", "conll_f1"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<Vec<String>> = documents
            .iter()
            .map(|(id, s)| {
                vec![
                    id.clone(),
                    format!("{:.4}", s.muc.f1),
                    format!("{:.4}", s.b_cubed.f1),
                    format!("{:.4}", s.ceaf_e.f1),
                    format!("{:.4}", s.conll_f1),
                ]
            })
            .collect();
        out += &table(&header, &rows);
    }
    out
}

pub fn mrp(scores: &MrpScores, granularity: Granularity) -> String {
    let header: Vec<String> = ["category", "gold", "system", "matched", "P", "R", "F1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let row = |name: String, g: usize, s: usize, m: usize, p: &Prf| {
        vec![
            name,
            g.to_string(),
            s.to_string(),
            m.to_string(),
            format!("{:.4}", p.precision),
            format!("{:.4}", p.recall),
            format!("{:.4}", p.f1),
        ]
    };
    let mut rows: Vec<Vec<String>> = scores
        .categories
        .iter()
        .map(|c| {
            let name = serde_json::to_value(c.category)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            row(name, c.gold, c.system, c.matched, &c.prf)
        })
        .collect();
    let o = &scores.overall;
    rows.push(row("overall".into(), o.gold, o.system, o.matched, &o.prf));
    let g = match granularity {
        Granularity::Role => "role",
        Granularity::Exact => "exact",
    };
    format!("granularity {g}\n{}", table(&header, &rows))
}

pub fn kappa(items: usize, k: f64) -> String {
    format!("items {items}  kappa {k:.4}\n")
}

fn row_name(r: EntityRow) -> &'static str {
    match r {
        EntityRow::Event => "EVENT",
        EntityRow::Tool => "TOOL",
        EntityRow::Habitat => "HABITAT",
        EntityRow::IngredientParticipant => "INGREDIENT (participant)",
        EntityRow::IngredientResult => "INGREDIENT (result)",
    }
}

pub fn stats(report: &CorpusStats) -> String {
    let mut header = vec![String::new()];
    header.extend(report.splits.iter().map(|s| s.split.clone()));
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |name: String, cell: &dyn Fn(&densepara::stats::SplitStats) -> String| {
        let mut r = vec![name];
        r.extend(report.splits.iter().map(cell));
        rows.push(r);
    };
    push("recipes".into(), &|s| s.recipes.to_string());
    push("sentences/recipe avg".into(), &|s| {
        format!("{:.2}", s.sentences.avg)
    });
    push("sentences/recipe max".into(), &|s| {
        s.sentences.max.to_string()
    });
    push("sentences/recipe min".into(), &|s| {
        s.sentences.min.to_string()
    });
    push("tokens/sentence avg".into(), &|s| {
        format!("{:.2}", s.sentence_length.avg)
    });
    push("tokens/sentence max".into(), &|s| {
        s.sentence_length.max.to_string()
    });
    push("tokens/sentence min".into(), &|s| {
        s.sentence_length.min.to_string()
    });
    let entity_rows: BTreeSet<EntityRow> = report
        .splits
        .iter()
        .flat_map(|s| s.entities.keys().copied())
        .collect();
    for r in entity_rows {
        push(format!("{} explicit", row_name(r)), &|s| {
            s.entities.get(&r).map_or(0, |e| e.explicit).to_string()
        });
        push(format!("{} hidden", row_name(r)), &|s| {
            s.entities.get(&r).map_or(0, |e| e.hidden).to_string()
        });
    }
    let chain_types: BTreeSet<String> = report
        .splits
        .iter()
        .flat_map(|s| s.chains.keys().cloned())
        .collect();
    for t in chain_types {
        push(format!("chains {t}"), &|s| {
            s.chains.get(&t).copied().unwrap_or(0).to_string()
        });
    }
    push("chains all".into(), &|s| s.chains_all.to_string());
    push("chains all explicit".into(), &|s| {
        s.chains_all_explicit.to_string()
    });
    table(&header, &rows)
}

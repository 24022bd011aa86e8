//! End-to-end behaviour of the `densepara` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use densepara::config::Config;
use densepara::{fixtures, parse_corpus};
use densepara_service::{router, Store};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const GOLDEN: &[&str] = &[
    "appelkoek",
    "chop_onions",
    "elision_cut",
    "garlic",
    "onions",
    "sauce",
    "saute_browned",
    "saute_onions",
];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    root().join("fixtures").join(format!("{name}.conllu"))
}

fn golden(file: &str) -> String {
    std::fs::read_to_string(root().join("fixtures/golden").join(file)).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_densepara"))
        .args(args)
        .env_remove("DENSEPARA_CONFIG_DIR")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
    stdout(&out)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn paraphrase_matches_golden_files() {
    for name in GOLDEN {
        let f = fixture(name);
        let f = path(&f);
        assert_eq!(
            ok(&["paraphrase", f]),
            golden(&format!("{name}.hrp.txt")),
            "{name} hrp"
        );
        assert_eq!(
            ok(&["paraphrase", "--inline", f]),
            golden(&format!("{name}.inline.hrp.txt")),
            "{name} inline"
        );
        assert_eq!(
            ok(&["paraphrase", "--mode", "mrp", f]),
            golden(&format!("{name}.mrp.txt")),
            "{name} mrp"
        );
        assert_eq!(
            ok(&["paraphrase", "--mode", "mrp", "--transfer", f]),
            golden(&format!("{name}.transfer.mrp.txt")),
            "{name} transfer"
        );
    }
}

#[test]
fn qgen_enumeration_matches_golden_files() {
    for name in GOLDEN {
        let f = fixture(name);
        assert_eq!(
            ok(&["qgen", "--enumerate-all", path(&f)]),
            golden(&format!("{name}.qa.jsonl")),
            "{name}"
        );
    }
}

#[test]
fn qgen_is_deterministic_per_seed() {
    let f = fixture("saute_onions");
    let a = ok(&["qgen", "--seed", "7", path(&f)]);
    let b = ok(&["qgen", "--seed", "7", path(&f)]);
    assert_eq!(a, b);
    assert!(!a.is_empty());
    let text = ok(&["qgen", "--seed", "7", "--format", "text", path(&f)]);
    for line in text.lines() {
        assert!(line.starts_with("question: "), "{line}");
        assert!(line.contains(" context: Chop the onions."), "{line}");
        assert_eq!(line.matches('\t').count(), 1, "{line}");
    }
}

#[test]
fn qgen_type_filter_and_bad_type() {
    let f = fixture("saute_onions");
    let out = ok(&["qgen", "--enumerate-all", "--types", "elision", path(&f)]);
    for line in out.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["type"], "elision");
    }
    let bad = run(&["qgen", "--types", "nonsense", path(&f)]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("unknown question type `nonsense`"));
}

#[test]
fn exit_codes_distinguish_validation_from_usage() {
    let all: Vec<PathBuf> = fixtures::ALL.iter().map(|(n, _)| fixture(n)).collect();
    let mut args = vec!["validate"];
    args.extend(all.iter().map(|p| path(p)));
    ok(&args);

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.conllu");
    let text = fixtures::APPELKOEK.replacen(
        "# link: ",
        "# link: nowhere|participant-of|ev1\n# link: ",
        1,
    );
    std::fs::write(&broken, text).unwrap();
    let out = run(&["validate", path(&broken)]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stdout(&out);
    assert!(msg.contains(&format!("{}:", broken.display())), "{msg}");
    assert!(msg.contains("nowhere"), "{msg}");

    let out = run(&["paraphrase", path(&broken)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains(path(&broken)));

    assert_eq!(
        run(&["paraphrase", "--mode", "xyz", "f"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let missing = run(&["events", "/definitely/not/here.conllu"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("/definitely/not/here.conllu"));
}

#[test]
fn parse_errors_carry_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.conllu");
    std::fs::write(&f, "# newdoc id = x\n# sent_id = 1\n1\tCut\tcut\n\n").unwrap();
    let out = run(&["validate", path(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains(&format!("{}:3:", f.display())),
        "{}",
        stdout(&out)
    );
}

#[test]
fn json_flag_is_accepted_everywhere() {
    let f = fixture("onions");
    let f = path(&f);
    let lines = |s: String| -> Vec<Value> {
        s.lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    };
    let v = lines(ok(&["--json", "validate", f]));
    assert_eq!(v[0]["ok"], true);
    assert_eq!(v[0]["documents"], 2);

    let ev = lines(ok(&["events", f, "--json"]));
    assert!(ev.iter().all(|e| e["event"]["event_id"].is_string()));
    let ids: Vec<&str> = ev.iter().map(|e| e["doc_id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);

    let ch = lines(ok(&["chains", "--json", f]));
    assert!(ch.iter().any(|c| c["chain"]["chain_id"] == "c1"));

    let p = lines(ok(&["paraphrase", "--json", "--mode", "mrp", f]));
    assert_eq!(p.len(), 2);
    assert_eq!(p[0]["mode"], "mrp");
    assert_eq!(p[0]["doc_id"], "onions-sauteed");

    let q = lines(ok(&[
        "qgen",
        "--json",
        "--format",
        "text",
        path(&fixture("saute_onions")),
    ]));
    assert!(q.iter().all(|i| i["question"].is_string()));

    let fx = lines(ok(&["fixtures", "--json"]));
    assert_eq!(
        fx[0]["fixtures"].as_array().unwrap().len(),
        fixtures::ALL.len()
    );

    let dir = fixture_dir();
    let s = lines(ok(&["stats", "--json", path(dir.path())]));
    assert_eq!(s[0]["splits"][0]["split"], "all");
}

#[test]
fn output_is_ordered_by_document_id() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("two.conllu");
    let corpus = parse_corpus(fixtures::ONIONS).unwrap();
    let reversed: String = corpus.iter().rev().map(densepara::write_document).collect();
    std::fs::write(&f, reversed).unwrap();
    assert_eq!(ok(&["paraphrase", path(&f)]), golden("onions.hrp.txt"));
}

fn fixture_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fixtures", "--out", path(dir.path())]);
    dir
}

#[test]
fn fixtures_are_written_canonically() {
    let dir = fixture_dir();
    for (name, text) in fixtures::ALL {
        let written = std::fs::read_to_string(dir.path().join(format!("{name}.conllu"))).unwrap();
        assert_eq!(&written, text, "{name}");
    }
}

#[test]
fn stats_table_and_splits() {
    let dir = fixture_dir();
    let manifest = dir.path().join("splits.tsv");
    let docs: Vec<String> = fixtures::ALL
        .iter()
        .flat_map(|(_, t)| parse_corpus(t).unwrap())
        .map(|d| d.doc_id)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let lines: String = docs
        .iter()
        .enumerate()
        .map(|(i, id)| format!("{id}\t{}\n", ["train", "dev", "test"][i % 3]))
        .collect();
    std::fs::write(&manifest, lines).unwrap();
    let table = ok(&["stats", path(dir.path()), "--splits", path(&manifest)]);
    let header: Vec<&str> = table.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["train", "dev", "test"]);
    // numeric columns are right-aligned, so every row has the header's width
    let width = table.lines().next().unwrap().len();
    let recipes = table.lines().find(|l| l.starts_with("recipes")).unwrap();
    assert_eq!(recipes.len(), width);
    let counts: usize = recipes
        .split_whitespace()
        .skip(1)
        .map(|c| c.parse::<usize>().unwrap())
        .sum();
    let total: usize = fixtures::ALL
        .iter()
        .map(|(_, t)| parse_corpus(t).unwrap().len())
        .sum();
    assert_eq!(counts, total);
}

#[test]
fn eval_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };

    let gold = write(
        "gold.jsonl",
        "{\"doc_id\":\"d\",\"question\":\"q1\",\"answer\":\"apples\"}\n{\"doc_id\":\"d\",\"question\":\"q2\",\"answer\":\"pan\"}\n",
    );
    let sys = write(
        "sys.jsonl",
        "{\"doc_id\":\"d\",\"question\":\"q1\",\"answer\":\"the peeled apples\"}\n",
    );
    let v: Value =
        serde_json::from_str(&ok(&["eval", "qa", path(&sys), path(&gold), "--json"])).unwrap();
    assert_eq!(v["missing"], 1);
    assert_eq!(v["scores"]["count"], 2);
    let f1 = v["scores"]["f1"].as_f64().unwrap();
    assert!((f1 - (2.0 / 3.0) / 2.0).abs() < 1e-12, "{f1}");

    let f = fixture("appelkoek");
    let v: Value =
        serde_json::from_str(&ok(&["--json", "eval", "coref", path(&f), path(&f)])).unwrap();
    assert_eq!(v["overall"]["conll_f1"], 1.0);
    let text = ok(&["eval", "coref", path(&f), path(&f)]);
    assert!(text.contains("conll_f1 1.0000"));

    let mrp = ok(&["paraphrase", "--mode", "mrp", path(&f)]);
    let m = write("a.mrp", &mrp);
    let v: Value =
        serde_json::from_str(&ok(&["eval", "mrp", path(&m), path(&m), "--json"])).unwrap();
    assert_eq!(v["scores"]["overall"]["prf"]["f1"], 1.0);
    assert_eq!(v["granularity"], "exact");
    assert_eq!(
        run(&["eval", "mrp", path(&m), path(&m), "--granularity", "coarse"])
            .status
            .code(),
        Some(2)
    );

    let a = write("a.txt", "A\nA\nB\nB\n");
    let b = write("b.txt", "A\nA\nB\nA\n");
    let v: Value =
        serde_json::from_str(&ok(&["eval", "kappa", path(&a), path(&b), "--json"])).unwrap();
    assert!((v["kappa"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let short = write("c.txt", "A\n");
    assert_eq!(
        run(&["eval", "kappa", path(&a), path(&short)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn coref_eval_penalises_a_split_chain() {
    let dir = tempfile::tempdir().unwrap();
    let split = dir.path().join("split.conllu");
    let gold = fixture("appelkoek");
    let text = std::fs::read_to_string(&gold).unwrap();
    // c3 and c4 hold only shadow entities, so dropping them leaves a valid document
    let stripped: String = text
        .lines()
        .filter(|l| !l.starts_with("# coref: c3") && !l.starts_with("# coref: c4"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&split, stripped).unwrap();
    let v: Value =
        serde_json::from_str(&ok(&["--json", "eval", "coref", path(&split), path(&gold)])).unwrap();
    let f1 = v["overall"]["conll_f1"].as_f64().unwrap();
    assert!(f1 < 1.0, "{f1}");
    assert_eq!(v["documents"].as_array().unwrap().len(), 1);
}

#[test]
fn config_dir_overrides_tables() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("onions");
    let base = ok(&["paraphrase", path(&f)]);
    std::fs::write(dir.path().join("participles.tsv"), "chop\tdiced\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_densepara"))
        .args(["paraphrase", path(&f)])
        .env("DENSEPARA_CONFIG_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let changed = stdout(&out);
    assert_ne!(changed, base);
    assert!(changed.contains("diced onions"), "{changed}");

    std::fs::write(dir.path().join("participles.tsv"), "no tab here\n").unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_densepara"))
        .args(["paraphrase", path(&f)])
        .env("DENSEPARA_CONFIG_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(
        stderr(&bad).contains("participles.tsv:1"),
        "{}",
        stderr(&bad)
    );
}

async fn fetch(app: &axum::Router, req: Request<Body>) -> (StatusCode, String) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

#[tokio::test]
async fn service_preview_equals_cli_paraphrase_of_export() {
    let store = Store::in_memory(Config::default());
    // both sprinkle fixtures carry the id `sprinkle`; start from the explicit-only one
    for (_, text) in fixtures::ALL
        .iter()
        .filter(|(n, _)| *n != "sprinkle_annotated")
    {
        for doc in parse_corpus(text).unwrap() {
            store.import(doc).unwrap();
        }
    }
    let app = router(Arc::new(store));

    // one edit first, so the comparison covers an edited document
    let edit = json!({"version": 0, "ops": [
        {"kind": "add_hidden", "label": "hand", "etype": "TOOL", "subtype": "shadow", "event": "ev1"},
        {"kind": "link_role", "entity": "h1", "relation": "participant-of", "event": "ev1"}
    ]});
    let req = Request::post("/docs/sprinkle/edits")
        .header("content-type", "application/json")
        .body(Body::from(edit.to_string()))
        .unwrap();
    let (status, body) = fetch(&app, req).await;
    assert_eq!(status, StatusCode::OK, "{body}");

    let (_, list) = fetch(&app, Request::get("/docs").body(Body::empty()).unwrap()).await;
    let list: Value = serde_json::from_str(&list).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for entry in list.as_array().unwrap() {
        let id = entry["id"].as_str().unwrap();
        let (_, export) = fetch(
            &app,
            Request::get(format!("/docs/{id}/export"))
                .body(Body::empty())
                .unwrap(),
        )
        .await;
        let file = dir.path().join(format!("{id}.conllu"));
        std::fs::write(&file, export).unwrap();
        for (query, args) in [
            ("mode=hrp", vec!["paraphrase"]),
            ("mode=hrp&inline=true", vec!["paraphrase", "--inline"]),
            ("mode=mrp", vec!["paraphrase", "--mode", "mrp"]),
            (
                "mode=mrp&transfer=true",
                vec!["paraphrase", "--mode", "mrp", "--transfer"],
            ),
        ] {
            let uri = format!("/docs/{id}/preview?{query}");
            let (status, preview) =
                fetch(&app, Request::get(&uri).body(Body::empty()).unwrap()).await;
            assert_eq!(status, StatusCode::OK, "{uri}");
            let mut argv = args.clone();
            argv.push(path(&file));
            assert_eq!(preview, ok(&argv), "{uri}");
        }
    }
}

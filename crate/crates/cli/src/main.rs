//! `densepara`: command line entry point for the dense paraphrasing toolkit.

mod report;

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use densepara::config::Config;
use densepara::coref::Strictness;
use densepara::metrics::{
    cohen_kappa, coref_scores, document_clusters, mrp_scores_at, qa_scores, Clusters, CorefScores,
    Granularity, QaScores,
};
use densepara::paraphrase::{render_text, Rendering};
use densepara::qgen::{generate, recipe_text, to_jsonl, to_text, QgenConfig, QuestionType};
use densepara::stats::{assign_splits, corpus_stats, read_split_manifest};
use densepara::{analyze, fixtures, parse_corpus, write_document, Analysis, Document, Error};
use densepara_service::Store;
use serde_json::json;

/// Environment variable naming a directory of replacement lookup tables.
const CONFIG_ENV: &str = "DENSEPARA_CONFIG_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "densepara",
    version,
    about = "Dense paraphrasing of annotated procedural text"
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Resolve undeclared drop entities against the latest prior mention with the same head noun.
    #[arg(long, global = true)]
    lenient: bool,
    /// Directory with senses.tsv, participles.tsv or prepositions.tsv overriding the embedded tables.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "DIR")]
    config_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and check documents against every invariant.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print assembled event graphs.
    Events { file: PathBuf },
    /// Print coreference chains with their state timelines.
    Chains { file: PathBuf },
    /// Print the human-readable or machine-readable paraphrase.
    Paraphrase(ParaphraseArgs),
    /// Generate question-answer items over hidden entities.
    Qgen(QgenArgs),
    /// Score system output against gold.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Corpus statistics per split.
    Stats(StatsArgs),
    /// Run the annotation HTTP service.
    Serve(ServeArgs),
    /// List the shipped fixtures or write them to a directory.
    Fixtures {
        /// Directory to write `<name>.conllu` files into.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Hrp,
    Mrp,
}

#[derive(Debug, Args)]
struct ParaphraseArgs {
    #[arg(long, value_enum, default_value = "hrp")]
    mode: Mode,
    /// General-domain keys (OBJECT_*) and at most two end states.
    #[arg(long)]
    transfer: bool,
    /// Trailing adjuncts with articles and "to get" outcomes.
    #[arg(long)]
    inline: bool,
    file: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QaFormat {
    Jsonl,
    Text,
}

#[derive(Debug, Args)]
struct QgenArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: QaFormat,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit every adjunct variant instead of one sampled variant per template.
    #[arg(long)]
    enumerate_all: bool,
    /// Comma-separated question types (default: all).
    #[arg(long, value_delimiter = ',')]
    types: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Exact match and token F1 of predicted answers (JSON lines).
    Qa { system: PathBuf, gold: PathBuf },
    /// MUC, B-cubed, CEAF-e and their average over two annotated corpora.
    Coref { system: PathBuf, gold: PathBuf },
    /// Per-category pair scores of line-aligned MRP files.
    Mrp {
        system: PathBuf,
        gold: PathBuf,
        #[arg(long, default_value = "exact")]
        granularity: String,
    },
    /// Cohen's kappa between two label files (one label per line).
    Kappa { first: PathBuf, second: PathBuf },
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// A directory of `.conllu` files or a single file.
    input: PathBuf,
    /// `doc_id<TAB>split` manifest; without it every document counts as split `all`.
    #[arg(long)]
    splits: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Persist documents and audit logs here; in memory when absent.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Documents to import at start-up (ids already in the store are kept).
    files: Vec<PathBuf>,
}

/// Exit status classes: 1 for invalid input, 2 for misuse.
#[derive(Debug)]
enum Failure {
    Invalid(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Invalid(e)
    }
}

type CmdResult = Result<(), Failure>;

struct Ctx {
    json: bool,
    strictness: Strictness,
    config: Config,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli);
    let _ = std::io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let config = match &cli.config_dir {
        Some(dir) => Config::from_dir(dir).map_err(|e| Failure::Usage(anyhow!(e)))?,
        None => Config::default(),
    };
    let ctx = Ctx {
        json: cli.json,
        strictness: if cli.lenient {
            Strictness::Lenient
        } else {
            Strictness::Strict
        },
        config,
    };
    match cli.command {
        Command::Validate { files } => validate(&ctx, &files),
        Command::Events { file } => events(&ctx, &file),
        Command::Chains { file } => chains(&ctx, &file),
        Command::Paraphrase(args) => paraphrase(&ctx, &args),
        Command::Qgen(args) => qgen(&ctx, &args),
        Command::Eval(cmd) => eval(&ctx, cmd),
        Command::Stats(args) => stats(&ctx, &args),
        Command::Serve(args) => serve(&ctx, args),
        Command::Fixtures { out } => fixtures_cmd(&ctx, out.as_deref()),
    }
}

/// Formats a core error with the file and, where known, the line.
fn located(path: &Path, e: &Error) -> anyhow::Error {
    match e {
        Error::Parse { line, reason } => anyhow!("{}:{line}: {reason}", path.display()),
        Error::DanglingRef { line, id } => {
            anyhow!("{}:{line}: unresolved reference `{id}`", path.display())
        }
        other => anyhow!("{}: {other}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Invalid)
}

/// Documents of a file, ordered by document id.
fn load(path: &Path) -> Result<Vec<Document>, Failure> {
    let text = read(path)?;
    let mut docs = parse_corpus(&text).map_err(|e| located(path, &e))?;
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(docs)
}

fn analyse<'d>(ctx: &Ctx, path: &Path, doc: &'d Document) -> Result<Analysis<'d>, Failure> {
    analyze(doc, &ctx.config.resources, ctx.strictness)
        .map_err(|e| Failure::Invalid(located(path, &e)))
}

fn json_line(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string(value).expect("values serialize");
    s.push('\n');
    s
}

fn validate(ctx: &Ctx, files: &[PathBuf]) -> CmdResult {
    let mut failed = false;
    for path in files {
        let outcome = load(path).and_then(|docs| {
            let mut warnings = Vec::new();
            for d in &docs {
                let an = analyse(ctx, path, d)?;
                warnings.extend(an.warnings().iter().map(|w| format!("{}: {w}", d.doc_id)));
            }
            Ok((docs.len(), warnings))
        });
        match (outcome, ctx.json) {
            (Ok((n, warnings)), true) => print!(
                "{}",
                json_line(&json!({"file": path, "ok": true, "documents": n, "warnings": warnings}))
            ),
            (Ok((n, warnings)), false) => {
                println!("ok {}: {n} document(s)", path.display());
                for w in warnings {
                    println!("  warning: {w}");
                }
            }
            (Err(Failure::Invalid(e)) | Err(Failure::Usage(e)), json) => {
                failed = true;
                if json {
                    print!(
                        "{}",
                        json_line(&json!({"file": path, "ok": false, "error": format!("{e:#}")}))
                    );
                } else {
                    println!("invalid {e:#}");
                }
            }
        }
    }
    if failed {
        Err(Failure::Invalid(anyhow!("validation failed")))
    } else {
        Ok(())
    }
}

fn events(ctx: &Ctx, path: &Path) -> CmdResult {
    let mut out = String::new();
    for doc in load(path)? {
        let an = analyse(ctx, path, &doc)?;
        for ev in &an.events {
            if ctx.json {
                out += &json_line(&json!({"doc_id": doc.doc_id, "event": ev}));
            } else {
                out += &report::event(&doc.doc_id, ev);
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn chains(ctx: &Ctx, path: &Path) -> CmdResult {
    let mut out = String::new();
    for doc in load(path)? {
        let an = analyse(ctx, path, &doc)?;
        for c in &an.chains.chains {
            if ctx.json {
                out += &json_line(&json!({"doc_id": doc.doc_id, "chain": c}));
            } else {
                out += &report::chain(&doc.doc_id, c);
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn paraphrase(ctx: &Ctx, args: &ParaphraseArgs) -> CmdResult {
    let rendering = match args.mode {
        Mode::Hrp => Rendering::Hrp,
        Mode::Mrp => Rendering::Mrp,
    };
    let cfg = ctx.config.dp(args.transfer, args.inline);
    let mut out = String::new();
    for doc in load(&args.file)? {
        let an = analyse(ctx, &args.file, &doc)?;
        let text = render_text(&an, &cfg, rendering);
        if ctx.json {
            let lines: Vec<&str> = text.lines().collect();
            out += &json_line(&json!({"doc_id": doc.doc_id, "mode": rendering, "lines": lines}));
        } else {
            out += &text;
        }
    }
    print!("{out}");
    Ok(())
}

fn qgen(ctx: &Ctx, args: &QgenArgs) -> CmdResult {
    let types = if args.types.is_empty() {
        densepara::qgen::ALL_TYPES.to_vec()
    } else {
        args.types
            .iter()
            .map(|t| t.trim().parse::<QuestionType>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Usage(anyhow!(e)))?
    };
    let cfg = QgenConfig {
        seed: args.seed,
        enumerate_all: args.enumerate_all,
        types,
        prepositions: ctx.config.prepositions.clone(),
    };
    let docs = load(&args.file)?;
    let mut items = Vec::new();
    for doc in &docs {
        let an = analyse(ctx, &args.file, doc)?;
        items.extend(generate(&an, &ctx.config.resources, &cfg));
    }
    // JSON output is always one item per line
    let text = match (args.format, ctx.json) {
        (QaFormat::Text, false) => {
            let contexts: HashMap<&str, String> = docs
                .iter()
                .map(|d| (d.doc_id.as_str(), recipe_text(d)))
                .collect();
            to_text(&items, |id| contexts[id].clone())
        }
        _ => to_jsonl(&items),
    };
    print!("{text}");
    Ok(())
}

fn eval(ctx: &Ctx, cmd: EvalCommand) -> CmdResult {
    let (value, text) = match cmd {
        EvalCommand::Qa { system, gold } => {
            let (scores, missing) = eval_qa(&system, &gold)?;
            (
                json!({"metric": "qa", "missing": missing, "scores": scores}),
                report::qa(&scores, missing),
            )
        }
        EvalCommand::Coref { system, gold } => {
            let (overall, documents) = eval_coref(ctx, &system, &gold)?;
            let per_doc: Vec<_> = documents
                .iter()
                .map(|(id, s)| json!({"doc_id": id, "scores": s}))
                .collect();
            (
                json!({"metric": "coref", "overall": overall, "documents": per_doc}),
                report::coref(&overall, &documents),
            )
        }
        EvalCommand::Mrp {
            system,
            gold,
            granularity,
        } => {
            let g: Granularity = granularity
                .parse()
                .map_err(|e: String| Failure::Usage(anyhow!(e)))?;
            let scores = mrp_scores_at(&read(&gold)?, &read(&system)?, g);
            (
                json!({"metric": "mrp", "granularity": g, "scores": scores}),
                report::mrp(&scores, g),
            )
        }
        EvalCommand::Kappa { first, second } => {
            let labels = |p: &Path| -> Result<Vec<String>, Failure> {
                Ok(read(p)?
                    .lines()
                    .map(|l| l.trim().to_string())
                    .filter(|l| !l.is_empty())
                    .collect())
            };
            let (a, b) = (labels(&first)?, labels(&second)?);
            let k = cohen_kappa(&a, &b).map_err(|e| Failure::Invalid(anyhow!(e)))?;
            (
                json!({"metric": "kappa", "items": a.len(), "kappa": k}),
                report::kappa(a.len(), k),
            )
        }
    };
    if ctx.json {
        print!("{}", json_line(&value));
    } else {
        print!("{text}");
    }
    Ok(())
}

fn read_jsonl(path: &Path) -> Result<Vec<serde_json::Value>, Failure> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Failure::Invalid(anyhow!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Items pair up by `(doc_id, question)`; gold duplicates become alternative answers.
fn eval_qa(system: &Path, gold: &Path) -> Result<(QaScores, usize), Failure> {
    let key = |v: &serde_json::Value, path: &Path| -> Result<(String, String, String), Failure> {
        let field = |name: &str| v.get(name).and_then(|x| x.as_str()).map(str::to_string);
        let q = field("question").ok_or_else(|| {
            Failure::Invalid(anyhow!("{}: item without `question`", path.display()))
        })?;
        let a = field("answer").ok_or_else(|| {
            Failure::Invalid(anyhow!("{}: item without `answer`", path.display()))
        })?;
        Ok((field("doc_id").unwrap_or_default(), q, a))
    };
    let mut golds: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    for v in read_jsonl(gold)? {
        let (d, q, a) = key(&v, gold)?;
        golds.entry((d, q)).or_default().push(a);
    }
    let mut preds: HashMap<(String, String), String> = HashMap::new();
    for v in read_jsonl(system)? {
        let (d, q, a) = key(&v, system)?;
        preds.entry((d, q)).or_insert(a);
    }
    let mut missing = 0usize;
    let pairs: Vec<(String, Vec<String>)> = golds
        .into_iter()
        .map(|(k, answers)| {
            let p = preds.get(&k).cloned().unwrap_or_else(|| {
                missing += 1;
                String::new()
            });
            (p, answers)
        })
        .collect();
    let scores = qa_scores(&pairs).map_err(|e| Failure::Invalid(anyhow!(e)))?;
    Ok((scores, missing))
}

type PerDocument = Vec<(String, CorefScores)>;

fn eval_coref(
    ctx: &Ctx,
    system: &Path,
    gold: &Path,
) -> Result<(CorefScores, PerDocument), Failure> {
    let clusters = |path: &Path| -> Result<BTreeMap<String, Clusters>, Failure> {
        let mut out = BTreeMap::new();
        for doc in load(path)? {
            let an = analyse(ctx, path, &doc)?;
            out.insert(doc.doc_id.clone(), document_clusters(&an));
        }
        Ok(out)
    };
    let (sys, key) = (clusters(system)?, clusters(gold)?);
    for id in key.keys() {
        if !sys.contains_key(id) {
            return Err(Failure::Invalid(anyhow!(
                "{}: document `{id}` is missing",
                system.display()
            )));
        }
    }
    let score =
        |k: &Clusters, r: &Clusters| coref_scores(k, r).map_err(|e| Failure::Invalid(anyhow!(e)));
    let mut documents = Vec::new();
    let (mut all_k, mut all_r) = (Clusters::new(), Clusters::new());
    for (id, k) in &key {
        let r = &sys[id];
        documents.push((id.clone(), score(k, r)?));
        all_k.extend(k.iter().cloned());
        all_r.extend(r.iter().cloned());
    }
    // keys carry the document id, so concatenation sums counts per document
    let overall = score(&all_k, &all_r)?;
    Ok((overall, documents))
}

fn conllu_files(input: &Path) -> Result<Vec<PathBuf>, Failure> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let entries = std::fs::read_dir(input)
        .with_context(|| format!("cannot read directory {}", input.display()))
        .map_err(Failure::Invalid)?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "conllu"))
        .collect();
    files.sort();
    Ok(files)
}

fn stats(ctx: &Ctx, args: &StatsArgs) -> CmdResult {
    let mut docs = Vec::new();
    for f in conllu_files(&args.input)? {
        docs.extend(load(&f)?);
    }
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let groups = match &args.splits {
        Some(p) => {
            let manifest = read_split_manifest(&read(p)?).map_err(|e| located(p, &e))?;
            assign_splits(&docs, &manifest).map_err(|e| located(p, &e))?
        }
        None => vec![("all".to_string(), docs.iter().collect())],
    };
    let report =
        corpus_stats(&groups, &ctx.config.resources).map_err(|e| located(&args.input, &e))?;
    if ctx.json {
        print!("{}", json_line(&report));
    } else {
        print!("{}", report::stats(&report));
    }
    Ok(())
}

fn serve(ctx: &Ctx, args: ServeArgs) -> CmdResult {
    let store = match &args.store {
        Some(dir) => Store::open(dir, ctx.config.clone()).map_err(|e| anyhow!(e))?,
        None => Store::in_memory(ctx.config.clone()),
    };
    for path in &args.files {
        for doc in load(path)? {
            if !store.contains(&doc.doc_id) {
                store
                    .import(doc)
                    .map_err(|e| anyhow!("{}: {e}", path.display()))?;
            }
        }
    }
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| Failure::Usage(anyhow!("bad address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new().context("cannot start runtime")?;
    eprintln!("listening on http://{addr}");
    runtime
        .block_on(densepara_service::serve(Arc::new(store), addr))
        .with_context(|| format!("cannot serve on {addr}"))?;
    Ok(())
}

fn fixtures_cmd(ctx: &Ctx, out: Option<&Path>) -> CmdResult {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, text) in fixtures::ALL {
            // fixtures are stored canonical; writing the parse keeps that guarantee visible
            let docs = parse_corpus(text).map_err(|e| anyhow!("{name}: {e}"))?;
            let canonical: String = docs.iter().map(write_document).collect();
            let path = dir.join(format!("{name}.conllu"));
            std::fs::write(&path, canonical)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    let names: Vec<&str> = fixtures::ALL.iter().map(|(n, _)| *n).collect();
    if ctx.json {
        print!("{}", json_line(&json!({"fixtures": names})));
    } else {
        for n in names {
            println!("{n}");
        }
    }
    Ok(())
}

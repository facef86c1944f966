//! `medcooc` command line: build, merge and inspect indexes, query them, and
//! run the HTTP server.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use medcooc::api::{self, ApiError};
use medcooc::cooc::{build_index, relatedness, EdgeKey, WeightConfig};
use medcooc::ontology::{load_dictionary, ConceptId};
use medcooc::server::{self, ApiConfig};
use medcooc::store::{
    self, load_index, merge_incremental, save_index, IndexBundle, DICTIONARY_FILE,
};
use medcooc::Explorer;

#[derive(Parser)]
#[command(
    name = "medcooc",
    version,
    about = "Concept co-occurrence network builder and explorer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a dictionary and a corpus.
    Build(BuildArgs),
    /// Merge an index built from a new batch of documents into a base index.
    Merge(MergeArgs),
    /// Print index statistics, one concept, or one edge.
    Inspect(InspectArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Print spelling suggestions (same body as GET /api/suggest).
    Suggest(SuggestArgs),
    /// Print the result tree for a concept (same body as GET /api/graph/{id}).
    Neighbors(NeighborsArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    dictionary: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Weight config; defaults apply when omitted.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MergeArgs {
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    delta: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "concept")]
    edge: Option<Vec<String>>,
    #[arg(long)]
    concept: Option<String>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: String,
    #[arg(long, default_value = "*")]
    cors_origin: String,
    #[arg(long)]
    feedback_log: Option<PathBuf>,
}

#[derive(Args)]
struct SuggestArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long)]
    k: Option<String>,
}

#[derive(Args)]
struct NeighborsArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    concept: String,
    /// Semantic type code; `any` disables the filter. Defaults to diseases.
    #[arg(long)]
    semantic_type: Option<String>,
    /// `hierarchical` or `flat`.
    #[arg(long)]
    mode: Option<String>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn data_error(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn usage_error(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Build(args) => build(args),
        Command::Merge(args) => merge(args),
        Command::Inspect(args) => inspect(args),
        Command::Serve(args) => serve(args),
        Command::Suggest(args) => suggest(args),
        Command::Neighbors(args) => neighbors(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn build(args: BuildArgs) -> Result<(), Failure> {
    let dict = load_dictionary(&args.dictionary).map_err(data_error)?;
    let summary = dict.summary();
    for a in &summary.ambiguities {
        eprintln!(
            "note: surface form {:?} resolved to {} (also {:?})",
            a.surface, a.winner, a.losers
        );
    }
    let cfg = match &args.weights {
        Some(path) => WeightConfig::load(path).map_err(data_error)?,
        None => WeightConfig::default(),
    };
    let corpus = fs::read_to_string(&args.corpus)
        .map_err(|e| data_error(format!("cannot read corpus {}: {e}", args.corpus.display())))?;
    let output = build_index(corpus.lines(), &dict, &cfg);
    let stats = output.stats;
    let bundle = IndexBundle::from_build(output, &dict, cfg);
    save_index(&bundle, &args.out).map_err(data_error)?;
    store::copy_dictionary(&args.dictionary, &args.out).map_err(data_error)?;

    println!("concepts:            {}", summary.concepts);
    println!("surface forms:       {}", summary.surface_forms);
    println!("ambiguous forms:     {}", summary.ambiguities.len());
    println!("documents processed: {}", stats.documents_processed);
    println!("documents skipped:   {}", stats.documents_skipped);
    println!("matched spans:       {}", stats.matched_spans);
    println!("distinct edges:      {}", stats.distinct_edges);
    println!("matrix entries:      {}", bundle.matrix.len());
    println!("index written to     {}", args.out.display());
    Ok(())
}

fn merge(args: MergeArgs) -> Result<(), Failure> {
    let base = load_index(&args.base).map_err(data_error)?;
    let delta = load_index(&args.delta).map_err(data_error)?;
    let merged = merge_incremental(&base, &delta).map_err(data_error)?;
    save_index(&merged, &args.out).map_err(data_error)?;
    let dict_copy = args.base.join(DICTIONARY_FILE);
    if dict_copy.exists() && args.out != args.base {
        store::copy_dictionary(&dict_copy, &args.out).map_err(data_error)?;
    }
    let s = merged.build_stats;
    println!(
        "merged: {} documents, {} edges, {} matrix entries",
        s.documents_processed,
        s.distinct_edges,
        merged.matrix.len()
    );
    Ok(())
}

fn concept_arg(bundle: &IndexBundle, raw: &str) -> Result<ConceptId, Failure> {
    ConceptId::new(raw)
        .ok()
        .filter(|id| bundle.fmap.index(id).is_some())
        .ok_or_else(|| data_error(format!("unknown concept {raw}")))
}

fn inspect(args: InspectArgs) -> Result<(), Failure> {
    let bundle = load_index(&args.index).map_err(data_error)?;

    if let Some(pair) = args.edge {
        let (a, b) = (
            concept_arg(&bundle, &pair[0])?,
            concept_arg(&bundle, &pair[1])?,
        );
        let score = relatedness(&bundle.matrix, &bundle.fmap, &a, &b).map_err(data_error)?;
        println!("edge {a} {b}");
        println!("score: {score}");
        let postings: Vec<_> = EdgeKey::new(a.clone(), b.clone())
            .and_then(|key| bundle.evidence.get(&key).map(|p| p.cloned().collect()))
            .unwrap_or_default();
        println!("postings: {}", postings.len());
        for p in postings {
            let title = bundle
                .documents
                .get(&p.doc_id)
                .map(|m| m.title.as_str())
                .unwrap_or("");
            match &p.subject_concept {
                Some(s) => println!(
                    "  {} {} {} (about {s}) {title}",
                    p.doc_id, p.pub_year, p.source_kind
                ),
                None => println!("  {} {} {} {title}", p.doc_id, p.pub_year, p.source_kind),
            }
        }
        return Ok(());
    }

    if let Some(raw) = args.concept {
        let id = concept_arg(&bundle, &raw)?;
        let index = bundle.fmap.index(&id).expect("checked");
        let row = bundle
            .matrix
            .iter()
            .filter(|((r, _), _)| *r == index)
            .count();
        let col = bundle
            .matrix
            .iter()
            .filter(|((_, c), _)| *c == index)
            .count();
        let edges = bundle.evidence.incident(&id).count();
        println!("concept {id} (index {index})");
        println!("row entries:    {row}");
        println!("column entries: {col}");
        println!("evidence edges: {edges}");
        return Ok(());
    }

    let s = bundle.build_stats;
    println!("format version:      {}", bundle.format_version);
    println!("dictionary checksum: {}", bundle.dictionary_checksum);
    println!("concepts:            {}", bundle.fmap.len());
    println!("matrix entries:      {}", bundle.matrix.len());
    println!("evidence edges:      {}", bundle.evidence.edge_count());
    println!("evidence postings:   {}", bundle.evidence.posting_count());
    println!("documents:           {}", bundle.documents.len());
    println!("documents processed: {}", s.documents_processed);
    println!("documents skipped:   {}", s.documents_skipped);
    println!("matched spans:       {}", s.matched_spans);
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let config = ApiConfig {
        bind_address: args.bind,
        index_dir: args.index,
        cors_allowed_origin: args.cors_origin,
        feedback_log: args.feedback_log,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(data_error)?;
    runtime.block_on(server::serve(config)).map_err(data_error)
}

fn open_explorer(dir: &PathBuf) -> Result<Explorer, Failure> {
    Explorer::open(dir).map_err(data_error)
}

fn print_body(result: Result<String, ApiError>) -> Result<(), Failure> {
    match result {
        Ok(body) => {
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(io::stdout().lock(), "{body}");
            Ok(())
        }
        Err(e @ ApiError::BadRequest(_)) => Err(usage_error(e)),
        Err(e @ ApiError::NotFound(_)) => Err(data_error(e)),
    }
}

fn suggest(args: SuggestArgs) -> Result<(), Failure> {
    let explorer = open_explorer(&args.index)?;
    print_body(api::suggest_body(
        &explorer,
        Some(&args.query),
        args.k.as_deref(),
    ))
}

fn neighbors(args: NeighborsArgs) -> Result<(), Failure> {
    let explorer = open_explorer(&args.index)?;
    print_body(api::graph_body(
        &explorer,
        &args.concept,
        args.semantic_type.as_deref(),
        args.mode.as_deref(),
    ))
}

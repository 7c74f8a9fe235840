//! `mt` — ingest interaction records, train the pattern models, sweep
//! model selection, analyze the mention graph, and generate synthetic
//! corpora with known ground truth.
//!
//! All data goes to files or stdout; progress goes to stderr. Exit
//! codes: 0 success, 1 validation, 2 i/o, 3 internal-consistency fault.

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(
    name = "mt",
    version,
    about = "Topic and community inference for social interaction networks"
)]
struct Cli {
    /// Cap the number of worker threads (parallel builds only).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse JSON-lines records into a corpus snapshot.
    Ingest(IngestArgs),
    /// Train a model and export its snapshot and reports.
    Train(TrainArgs),
    /// Export top words per topic from a model snapshot.
    Topics(TopicsArgs),
    /// Export per-topic user rankings from a model snapshot.
    Users(UsersArgs),
    /// Export community assignments from a CIPM snapshot.
    Communities(CommunitiesArgs),
    /// Sweep K (or C) and report held-out perplexity per value.
    Perplexity(PerplexityArgs),
    /// Build the mention graph and compute network statistics.
    Graph(GraphArgs),
    /// Forward-sample a synthetic corpus with ground truth.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// JSON-lines input; one record per line.
    #[arg(long)]
    input: String,
    /// Corpus snapshot to write.
    #[arg(long)]
    output: String,
    /// Stopword file, one lowercase word per line (replaces the default list).
    #[arg(long)]
    stopwords: Option<String>,
    /// Disable stopword filtering entirely.
    #[arg(long)]
    no_stopwords: bool,
    /// Keep only words occurring at least this often.
    #[arg(long, default_value_t = 1)]
    min_word_count: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus snapshot from `mt ingest`.
    #[arg(long)]
    corpus: String,
    /// ipm, uipm, or cipm.
    #[arg(long)]
    model: String,
    /// Number of topics K.
    #[arg(long)]
    topics: usize,
    /// Number of communities C (required for cipm).
    #[arg(long)]
    communities: Option<usize>,
    /// Topic-proportion prior; defaults to 50/K.
    #[arg(long)]
    alpha: Option<f64>,
    /// Topic-word prior.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    /// User-community prior.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Community-mention prior; defaults to gamma.
    #[arg(long)]
    delta: Option<f64>,
    /// Full Gibbs sweeps.
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// RNG seed; falls back to MT_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for model.json and the report CSVs.
    #[arg(long)]
    out_dir: String,
    /// Words per topic in topics.csv.
    #[arg(long, default_value_t = 10)]
    top_words: usize,
    /// Users per topic in users.csv.
    #[arg(long, default_value_t = 10)]
    top_users: usize,
    /// Include per-token assignments in the snapshot.
    #[arg(long)]
    include_assignments: bool,
    /// Log training perplexity to stderr every N sweeps (0 = off).
    #[arg(long, default_value_t = 10)]
    trace_every: usize,
}

#[derive(Args)]
struct TopicsArgs {
    /// Model snapshot.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Output CSV.
    #[arg(long)]
    output: String,
}

#[derive(Args)]
struct UsersArgs {
    /// Model snapshot (uipm or cipm).
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Output CSV.
    #[arg(long)]
    output: String,
}

#[derive(Args)]
struct CommunitiesArgs {
    /// CIPM model snapshot.
    #[arg(long)]
    model: String,
    /// threshold (μ ≥ 1/C) or argmax.
    #[arg(long, default_value = "threshold")]
    mode: String,
    /// Output CSV.
    #[arg(long)]
    output: String,
    /// Also write the per-user topic-of-maximum-interest table for one
    /// community.
    #[arg(long)]
    report_community: Option<usize>,
    /// Where to write that table (defaults next to --output).
    #[arg(long)]
    report_output: Option<String>,
}

#[derive(Args)]
struct PerplexityArgs {
    /// Corpus snapshot.
    #[arg(long)]
    corpus: String,
    /// ipm, uipm, or cipm.
    #[arg(long)]
    model: String,
    /// Swept values, comma separated (K by default, C with --sweep communities).
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<usize>,
    /// "topics" sweeps K; "communities" sweeps C for a fixed K.
    #[arg(long, default_value = "topics")]
    sweep: String,
    /// Fixed K for a community sweep.
    #[arg(long)]
    topics: Option<usize>,
    /// Fixed C used when sweeping K with cipm.
    #[arg(long)]
    communities: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    delta: Option<f64>,
    /// Training sweeps per value.
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    /// Fold-in sweeps per held-out document.
    #[arg(long, default_value_t = 50)]
    fold_in: usize,
    #[arg(long, default_value_t = 0.9)]
    train_fraction: f64,
    /// by-user or by-doc; defaults to by-doc for ipm, by-user otherwise.
    #[arg(long)]
    split_unit: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (a .meta.json sidecar records the resolved config).
    #[arg(long)]
    output: String,
}

#[derive(Args)]
struct GraphArgs {
    /// JSON-lines interaction records.
    #[arg(long)]
    input: String,
    /// mentioner-to-mentioned (default) or mentioned-to-mentioner.
    #[arg(long, default_value = "mentioner-to-mentioned")]
    direction: String,
    /// Restrict to the largest connected component first.
    #[arg(long)]
    lcc: bool,
    /// Write node-level metrics CSV (requires a connected graph; use --lcc).
    #[arg(long)]
    metrics: Option<String>,
    /// Write graph-level metrics JSON.
    #[arg(long)]
    graph_metrics: Option<String>,
    /// Write the directed edge list CSV.
    #[arg(long)]
    edges: Option<String>,
    /// Write GraphML.
    #[arg(long)]
    graphml: Option<String>,
    /// Write the degree distribution CSV.
    #[arg(long)]
    degrees: Option<String>,
    /// in, out, or total — for --degrees and --fit-powerlaw.
    #[arg(long, default_value = "total")]
    degree_mode: String,
    /// Fit a discrete power law to the degree sequence.
    #[arg(long)]
    fit_powerlaw: bool,
    /// Fix the power-law tail cutoff instead of KS selection.
    #[arg(long)]
    xmin: Option<u64>,
    /// Where to write the fit JSON (stdout if omitted).
    #[arg(long)]
    powerlaw_out: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    /// ipm, uipm, or cipm.
    #[arg(long)]
    process: String,
    #[arg(long)]
    topics: usize,
    /// Vocabulary size W.
    #[arg(long)]
    vocab: usize,
    /// Documents (ipm).
    #[arg(long)]
    docs: Option<usize>,
    /// Users (uipm/cipm).
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    docs_per_user: Option<usize>,
    #[arg(long)]
    tokens_per_doc: usize,
    /// Communities (cipm).
    #[arg(long)]
    communities: Option<usize>,
    /// Mention events per document (cipm).
    #[arg(long)]
    mentions_per_doc: Option<usize>,
    /// Cross-block mention mass (cipm).
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    delta: Option<f64>,
    /// Draw document lengths from Poisson(tokens_per_doc).
    #[arg(long)]
    poisson_lengths: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON-lines corpus to write.
    #[arg(long)]
    output: String,
    /// Ground-truth sidecar to write.
    #[arg(long)]
    truth: String,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = mtopics::parallel::configure_threads(threads) {
            eprintln!("warning: could not configure thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Train(args) => commands::train(args),
        Command::Topics(args) => commands::topics(args),
        Command::Users(args) => commands::users(args),
        Command::Communities(args) => commands::communities(args),
        Command::Perplexity(args) => commands::perplexity(args),
        Command::Graph(args) => commands::graph(args),
        Command::Generate(args) => commands::generate(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

/// --seed wins; MT_SEED applies only when --seed is absent; then 42.
fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("MT_SEED")
            .ok()
            .and_then(|v| v.parse::<u64>().ok())
    })
    .unwrap_or(42)
}

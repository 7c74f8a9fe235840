use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::json;

use mtopics::corpus::{
    build_corpus, default_stopwords, parse_records, Corpus, IngestInfo, InteractionRecord,
};
use mtopics::error::{Error, Result};
use mtopics::evaluation::{community_sweep, k_sweep, SplitSpec, SplitUnit, SweepConfig};
use mtopics::export;
use mtopics::graph::{build_graph, fit_power_law, DegreeMode, MentionDirection};
use mtopics::models::cipm::{assign_communities, mention_similarity_report, AssignmentMode};
use mtopics::models::{train as train_model, ModelKind, ModelSnapshot};
use mtopics::sampler::Hyperparams;
use mtopics::synthgen::{
    generate_cipm, generate_ipm, generate_uipm, CipmGenConfig, IpmGenConfig, UipmGenConfig,
};

use crate::{
    resolve_seed, CommunitiesArgs, GenerateArgs, GraphArgs, IngestArgs, PerplexityArgs,
    TopicsArgs, TrainArgs, UsersArgs,
};

fn open(path: &str) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn create(path: &str) -> Result<BufWriter<File>> {
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_json_value(path: &str, value: &serde_json::Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::Snapshot(format!("could not serialize {path}: {e}")))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn load_corpus(path: &str) -> Result<Corpus> {
    Corpus::read_json(open(path)?)
}

fn load_model(path: &str) -> Result<ModelSnapshot> {
    ModelSnapshot::read_json(open(path)?)
}

fn load_stopwords(args: &IngestArgs) -> Result<(HashSet<String>, Vec<String>)> {
    let set: HashSet<String> = if args.no_stopwords {
        HashSet::new()
    } else if let Some(path) = &args.stopwords {
        let mut set = HashSet::new();
        for line in open(path)?.lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let word = line.trim().to_lowercase();
            if !word.is_empty() {
                set.insert(word);
            }
        }
        set
    } else {
        default_stopwords()
    };
    let mut sorted: Vec<String> = set.iter().cloned().collect();
    sorted.sort_unstable();
    Ok((set, sorted))
}

pub fn ingest(args: IngestArgs) -> Result<()> {
    let (stopwords, stopwords_sorted) = load_stopwords(&args)?;
    let (records, parse_report) = parse_records(open(&args.input)?)?;
    let (corpus, build_report) = build_corpus(&records, &stopwords, args.min_word_count)?;
    eprintln!(
        "ingest: {} lines, {} records, {} parse failures, {} docs dropped",
        parse_report.lines_read,
        parse_report.records,
        parse_report.parse_failures,
        build_report.docs_dropped
    );
    eprintln!(
        "corpus: W={} U={} M={} N={}",
        corpus.word_count(),
        corpus.user_count(),
        corpus.doc_count(),
        corpus.total_tokens()
    );
    let info = IngestInfo {
        min_word_count: args.min_word_count,
        stopwords: stopwords_sorted,
        parse: parse_report,
        build: build_report,
    };
    let mut out = create(&args.output)?;
    corpus.write_json(&mut out, Some(info))?;
    out.flush().map_err(|e| Error::io(&args.output, e))?;
    Ok(())
}

fn resolve_hyper(
    kind: ModelKind,
    topics: usize,
    communities: Option<usize>,
    alpha: Option<f64>,
    beta: f64,
    gamma: f64,
    delta: Option<f64>,
) -> Result<Hyperparams> {
    let communities = match (kind, communities) {
        (ModelKind::Cipm, Some(c)) => c,
        (ModelKind::Cipm, None) => {
            return Err(Error::InvalidArgument(
                "cipm requires --communities".into(),
            ));
        }
        (_, Some(_)) => {
            return Err(Error::InvalidArgument(
                "--communities is only valid for cipm".into(),
            ));
        }
        (_, None) => 1,
    };
    let hyper = Hyperparams {
        alpha: alpha.unwrap_or(50.0 / topics.max(1) as f64),
        beta,
        gamma,
        delta: delta.unwrap_or(gamma),
        topics,
        communities,
    };
    hyper.validate()?;
    Ok(hyper)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let kind = ModelKind::from_str(&args.model)?;
    let hyper = resolve_hyper(
        kind,
        args.topics,
        args.communities,
        args.alpha,
        args.beta,
        args.gamma,
        args.delta,
    )?;
    let seed = resolve_seed(args.seed);
    let corpus = std::sync::Arc::new(load_corpus(&args.corpus)?);
    let config = json!({
        "command": "train",
        "corpus": args.corpus,
        "model": kind.as_str(),
        "hyper": hyper,
        "sweeps": args.sweeps,
        "seed": seed,
        "top_words": args.top_words,
        "top_users": args.top_users,
        "include_assignments": args.include_assignments,
    });
    let mut trace = |sweep: usize, ppl: f64| {
        eprintln!("sweep {sweep}: train perplexity {ppl:.4}");
    };
    let model = train_model(
        &corpus,
        kind,
        &hyper,
        seed,
        args.sweeps,
        args.trace_every,
        Some(&mut trace),
    )?;
    let snapshot = model.to_snapshot(args.include_assignments, Some(config));
    let dir = Path::new(&args.out_dir);
    std::fs::create_dir_all(dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();

    let model_path = path("model.json");
    let mut w = create(&model_path)?;
    snapshot.write_json(&mut w)?;
    w.flush().map_err(|e| Error::io(&model_path, e))?;

    let estimate = snapshot.to_estimate()?;
    export::write_topics_csv(create(&path("topics.csv"))?, &estimate, args.top_words)?;
    if kind != ModelKind::Ipm {
        let rankings: Vec<(usize, Vec<(String, f64)>)> = (0..hyper.topics)
            .map(|k| Ok((k, snapshot.user_rankings(k, args.top_users)?)))
            .collect::<Result<_>>()?;
        export::write_users_csv(create(&path("users.csv"))?, &rankings)?;
    }
    if kind == ModelKind::Cipm {
        let memberships = assign_communities(&estimate, AssignmentMode::Threshold)?;
        export::write_communities_csv(
            create(&path("communities.csv"))?,
            &memberships,
            AssignmentMode::Threshold,
            &estimate.user_ids,
        )?;
    }
    eprintln!("train: wrote {}", dir.display());
    Ok(())
}

pub fn topics(args: TopicsArgs) -> Result<()> {
    let snapshot = load_model(&args.model)?;
    let estimate = snapshot.to_estimate()?;
    export::write_topics_csv(create(&args.output)?, &estimate, args.top)
}

pub fn users(args: UsersArgs) -> Result<()> {
    let snapshot = load_model(&args.model)?;
    let rankings: Vec<(usize, Vec<(String, f64)>)> = (0..snapshot.meta.hyper.topics)
        .map(|k| Ok((k, snapshot.user_rankings(k, args.top)?)))
        .collect::<Result<_>>()?;
    export::write_users_csv(create(&args.output)?, &rankings)
}

pub fn communities(args: CommunitiesArgs) -> Result<()> {
    let snapshot = load_model(&args.model)?;
    if snapshot.meta.kind != ModelKind::Cipm {
        return Err(Error::InvalidArgument(
            "community export requires a cipm snapshot".into(),
        ));
    }
    let mode = AssignmentMode::from_str(&args.mode)?;
    let estimate = snapshot.to_estimate()?;
    let memberships = assign_communities(&estimate, mode)?;
    export::write_communities_csv(
        create(&args.output)?,
        &memberships,
        mode,
        &estimate.user_ids,
    )?;
    if let Some(community) = args.report_community {
        let rows = mention_similarity_report(&estimate, community)?;
        let report_path = args
            .report_output
            .unwrap_or_else(|| format!("{}.community-{community}.csv", args.output));
        export::write_interest_report_csv(create(&report_path)?, &rows)?;
    }
    Ok(())
}

pub fn perplexity(args: PerplexityArgs) -> Result<()> {
    let kind = ModelKind::from_str(&args.model)?;
    let seed = resolve_seed(args.seed);
    let corpus = std::sync::Arc::new(load_corpus(&args.corpus)?);
    let unit = match args.split_unit.as_deref() {
        Some("by-user") => SplitUnit::ByUser,
        Some("by-doc") => SplitUnit::ByDoc,
        Some(other) => {
            return Err(Error::InvalidArgument(format!(
                "unknown split unit {other:?}"
            )));
        }
        None => match kind {
            ModelKind::Ipm => SplitUnit::ByDoc,
            _ => SplitUnit::ByUser,
        },
    };
    match args.sweep.as_str() {
        "topics" => {
            let hyper = resolve_hyper(
                kind,
                // Overridden per swept value; alpha defaults per value below.
                args.values[0],
                match kind {
                    ModelKind::Cipm => args.communities.or(Some(args.values[0])),
                    _ => args.communities,
                },
                args.alpha,
                args.beta,
                args.gamma,
                args.delta,
            )?;
            let cfg = SweepConfig {
                hyper,
                train_sweeps: args.sweeps,
                fold_in_sweeps: args.fold_in,
                split: SplitSpec {
                    train_fraction: args.train_fraction,
                    unit,
                    seed,
                },
            };
            let rows = k_sweep(&corpus, kind, &args.values, &cfg)?;
            export::write_sweep_csv(create(&args.output)?, &rows)?;
            write_json_value(
                &format!("{}.meta.json", args.output),
                &json!({
                    "command": "perplexity",
                    "sweep": "topics",
                    "corpus": args.corpus,
                    "model": kind.as_str(),
                    "values": args.values,
                    "config": cfg,
                    "seed": seed,
                }),
            )?;
        }
        "communities" => {
            if kind != ModelKind::Cipm {
                return Err(Error::InvalidArgument(
                    "a community sweep requires --model cipm".into(),
                ));
            }
            let topics = args.topics.ok_or_else(|| {
                Error::InvalidArgument("a community sweep requires --topics".into())
            })?;
            let hyper = resolve_hyper(
                kind,
                topics,
                Some(args.values[0]),
                args.alpha,
                args.beta,
                args.gamma,
                args.delta,
            )?;
            let cfg = SweepConfig {
                hyper,
                train_sweeps: args.sweeps,
                fold_in_sweeps: args.fold_in,
                split: SplitSpec {
                    train_fraction: args.train_fraction,
                    unit,
                    seed,
                },
            };
            let rows = community_sweep(&corpus, &args.values, &cfg)?;
            export::write_community_sweep_csv(create(&args.output)?, &rows)?;
            write_json_value(
                &format!("{}.meta.json", args.output),
                &json!({
                    "command": "perplexity",
                    "sweep": "communities",
                    "corpus": args.corpus,
                    "model": kind.as_str(),
                    "values": args.values,
                    "config": cfg,
                    "seed": seed,
                }),
            )?;
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown sweep {other:?} (expected topics or communities)"
            )));
        }
    }
    Ok(())
}

pub fn graph(args: GraphArgs) -> Result<()> {
    let direction = MentionDirection::from_str(&args.direction)?;
    let degree_mode = DegreeMode::from_str(&args.degree_mode)?;
    let (records, parse_report) = parse_records(open(&args.input)?)?;
    let mut graph = build_graph(&records, direction);
    eprintln!(
        "graph: {} records, {} nodes, {} directed edges",
        parse_report.records,
        graph.node_count(),
        graph.directed_edge_count()
    );
    if args.lcc {
        graph = graph.largest_connected_component();
        eprintln!(
            "lcc: {} nodes, {} directed edges",
            graph.node_count(),
            graph.directed_edge_count()
        );
    }
    let config = json!({
        "command": "graph",
        "input": args.input,
        "direction": direction.as_str(),
        "lcc": args.lcc,
        "degree_mode": args.degree_mode,
        "xmin": args.xmin,
    });
    let mut first_output: Option<String> = None;
    let track = |path: &str, first: &mut Option<String>| {
        if first.is_none() {
            *first = Some(path.to_string());
        }
    };
    if let Some(path) = &args.metrics {
        let rows = mtopics::graph::node_metrics(&graph)?;
        export::write_node_metrics_csv(create(path)?, &rows)?;
        track(path, &mut first_output);
    }
    if let Some(path) = &args.graph_metrics {
        let gm = mtopics::graph::graph_metrics(&graph)?;
        write_json_value(path, &json!({ "metrics": gm, "config": config }))?;
        track(path, &mut first_output);
    }
    if let Some(path) = &args.edges {
        export::write_edge_list_csv(create(path)?, &graph)?;
        track(path, &mut first_output);
    }
    if let Some(path) = &args.graphml {
        export::write_graphml(create(path)?, &graph)?;
        track(path, &mut first_output);
    }
    if let Some(path) = &args.degrees {
        let dist = graph.degree_distribution(degree_mode);
        export::write_degree_distribution_csv(create(path)?, &dist)?;
        track(path, &mut first_output);
    }
    if args.fit_powerlaw {
        let degrees: Vec<u64> = graph
            .degrees(degree_mode)
            .into_iter()
            .map(|d| d as u64)
            .collect();
        let fit = fit_power_law(&degrees, args.xmin)?;
        let value = json!({ "fit": fit, "config": config });
        match &args.powerlaw_out {
            Some(path) => {
                write_json_value(path, &value)?;
                track(path, &mut first_output);
            }
            None => {
                let text = serde_json::to_string_pretty(&value)
                    .map_err(|e| Error::Snapshot(format!("fit serialization failed: {e}")))?;
                println!("{text}");
            }
        }
    }
    if let Some(first) = first_output {
        write_json_value(&format!("{first}.meta.json"), &config)?;
    }
    Ok(())
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let seed = resolve_seed(args.seed);
    let need = |v: Option<usize>, name: &str| {
        v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this process")))
    };
    let synthetic = match args.process.as_str() {
        "ipm" => generate_ipm(&IpmGenConfig {
            topics: args.topics,
            words: args.vocab,
            docs: need(args.docs, "docs")?,
            tokens_per_doc: args.tokens_per_doc,
            alpha: args.alpha,
            beta: args.beta,
            seed,
            poisson_lengths: args.poisson_lengths,
        })?,
        "uipm" => generate_uipm(&UipmGenConfig {
            topics: args.topics,
            words: args.vocab,
            users: need(args.users, "users")?,
            docs_per_user: need(args.docs_per_user, "docs-per-user")?,
            tokens_per_doc: args.tokens_per_doc,
            alpha: args.alpha,
            beta: args.beta,
            seed,
            poisson_lengths: args.poisson_lengths,
        })?,
        "cipm" => generate_cipm(&CipmGenConfig {
            topics: args.topics,
            words: args.vocab,
            users: need(args.users, "users")?,
            communities: need(args.communities, "communities")?,
            docs_per_user: need(args.docs_per_user, "docs-per-user")?,
            tokens_per_doc: args.tokens_per_doc,
            mentions_per_doc: need(args.mentions_per_doc, "mentions-per-doc")?,
            alpha: args.alpha,
            beta: args.beta,
            gamma: args.gamma,
            delta: args.delta.unwrap_or(args.gamma),
            epsilon: args.epsilon,
            seed,
            poisson_lengths: args.poisson_lengths,
        })?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown process {other:?} (expected ipm, uipm, or cipm)"
            )));
        }
    };
    write_records(&args.output, &synthetic.records())?;
    let mut w = create(&args.truth)?;
    synthetic.truth.write_json(&mut w)?;
    w.flush().map_err(|e| Error::io(&args.truth, e))?;
    eprintln!(
        "generate: {} docs, {} tokens → {}",
        synthetic.corpus.doc_count(),
        synthetic.corpus.total_tokens(),
        args.output
    );
    Ok(())
}

fn write_records(path: &str, records: &[InteractionRecord]) -> Result<()> {
    let mut w = create(path)?;
    for rec in records {
        let line = serde_json::to_string(rec)
            .map_err(|e| Error::Snapshot(format!("record serialization failed: {e}")))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

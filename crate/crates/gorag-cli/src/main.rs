//! Command-line front end for the gorag pipeline.
//!
//! `run` drives the full multi-round loop from a TOML config and prints the
//! report. The remaining subcommands expose the pieces: `split` turns a flat
//! JSONL file into a round-structured dataset, `index` builds a graph from
//! training rounds only, `retrieve` and `classify` query a saved graph,
//! `graph-stats` summarizes one, and `synth` generates a synthetic dataset
//! with a ready-to-run config. Machine-readable subcommands print JSON to
//! stdout; logs go to stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use gorag_core::classify::classify_text;
use gorag_core::corpus::{
    load_dataset, read_dataset, sample_k_shot, split_into_rounds, write_dataset, CorpusStats,
    TextDoc,
};
use gorag_core::graph::{index_training_round, merge_round, EdgeKind, WeightedGraph};
use gorag_core::harness::{execute_run, RunConfig, SynthSpec};
use gorag_core::llm::parse_keyword_reply;
use gorag_core::retrieval::{split_keywords, steiner_candidates, PathDomain, RetrievalOptions};

#[derive(Parser)]
#[command(name = "gorag", version)]
#[command(about = "Dynamic few-shot text classification over an online keyword/label graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a full multi-round run described by a TOML config.
    Run {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Assign the labels of a flat JSONL file to rounds and optionally carve
    /// a per-label train/test split.
    Split {
        /// Flat JSONL input; `round` fields are ignored and reassigned.
        #[arg(long)]
        input: PathBuf,
        /// Round-structured JSONL output.
        #[arg(long)]
        output: PathBuf,
        /// Number of rounds to deal the labels into.
        #[arg(long)]
        rounds: u32,
        /// Comma-separated labels per round, e.g. "5,5,6"; even spread when
        /// absent.
        #[arg(long)]
        per_round: Option<String>,
        /// Keep this many texts per label as training data and mark the rest
        /// as test; without it, existing split markers are kept.
        #[arg(long)]
        train_per_label: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Build the graph from the training rounds of a dataset, skipping
    /// evaluation.
    Index {
        /// Run configuration file (dataset, backend, markers, k-shot).
        #[arg(long)]
        config: PathBuf,
        /// Where to write the final graph.
        #[arg(long, default_value = "graph.json")]
        graph: PathBuf,
        /// Where to write the corpus statistics that scored it.
        #[arg(long, default_value = "stats.json")]
        stats: PathBuf,
    },
    /// Retrieve candidate labels for a keyword list from a saved graph.
    Retrieve {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated keywords.
        #[arg(long)]
        keywords: String,
        #[arg(long, default_value = "mst")]
        paths: PathDomain,
        /// Treat every edge as weight 1.
        #[arg(long)]
        unit_weights: bool,
    },
    /// Classify one text against a saved graph, without changing it.
    Classify {
        /// Run configuration file; supplies the backend and, for the mock,
        /// the dataset its document frequencies come from.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Corpus statistics saved alongside the graph.
        #[arg(long)]
        stats: PathBuf,
        /// Text to classify; reads stdin when absent.
        #[arg(long)]
        text: Option<String>,
    },
    /// Print summary statistics of a saved graph.
    GraphStats {
        #[arg(long)]
        graph: PathBuf,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Generate a synthetic dataset and a matching run config.
    Synth {
        /// Directory for dataset.jsonl and run.toml.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 8)]
        labels: usize,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long, default_value_t = 4)]
        train_per_label: usize,
        #[arg(long, default_value_t = 16)]
        test_per_round: usize,
        /// Probability that a test text's marker slot is swapped for another
        /// label's phrase.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Give labels display names.
        #[arg(long)]
        named_labels: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match Cli::parse().command {
        Command::Run { config, out_dir } => run(&config, out_dir),
        Command::Split {
            input,
            output,
            rounds,
            per_round,
            train_per_label,
            seed,
        } => split(&input, &output, rounds, per_round.as_deref(), train_per_label, seed),
        Command::Index {
            config,
            graph,
            stats,
        } => index(&config, &graph, &stats),
        Command::Retrieve {
            graph,
            keywords,
            paths,
            unit_weights,
        } => retrieve(&graph, &keywords, paths, unit_weights),
        Command::Classify {
            config,
            graph,
            stats,
            text,
        } => classify(&config, &graph, &stats, text),
        Command::GraphStats { graph, json } => graph_stats(&graph, json),
        Command::Synth {
            out_dir,
            labels,
            rounds,
            train_per_label,
            test_per_round,
            noise,
            named_labels,
            seed,
        } => synth(&out_dir, SynthSpec {
            labels,
            rounds,
            train_per_label,
            test_per_round,
            noise,
            named_labels,
            seed,
        }),
    }
}

fn run(config_path: &Path, out_dir: Option<PathBuf>) -> Result<()> {
    let mut config = RunConfig::load(config_path)
        .with_context(|| format!("loading config {}", config_path.display()))?;
    if let Some(dir) = out_dir {
        config.out_dir = Some(dir);
    }
    let outcome = execute_run(&config).context("run failed")?;
    print!("{}", outcome.report.render_text());
    if let Some(dir) = &config.out_dir {
        println!("artifacts: {}", dir.display());
    }
    Ok(())
}

fn split(
    input: &Path,
    output: &Path,
    rounds: u32,
    per_round: Option<&str>,
    train_per_label: Option<usize>,
    seed: u64,
) -> Result<()> {
    let records = read_dataset(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let counts: Option<Vec<usize>> = per_round
        .map(|raw| {
            raw.split(',')
                .map(|part| part.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("parsing per-round counts {raw:?}"))
        })
        .transpose()?;
    let out = split_into_rounds(&records, rounds, counts.as_deref(), train_per_label, seed)?;
    write_dataset(&out, output)
        .with_context(|| format!("writing {}", output.display()))?;
    println!("wrote {} records to {}", out.len(), output.display());
    Ok(())
}

fn index(config_path: &Path, graph_path: &Path, stats_path: &Path) -> Result<()> {
    let config = RunConfig::load(config_path)
        .with_context(|| format!("loading config {}", config_path.display()))?;
    let plan = load_dataset(&config.dataset, config.format)?;
    let sampled = sample_k_shot(&plan, config.k_shot, config.seed)?;
    let fixture: Vec<TextDoc> = plan
        .rounds
        .iter()
        .flat_map(|r| r.train.values().flatten().chain(r.test.iter()))
        .cloned()
        .collect();
    let gateway = config.build_gateway(&fixture)?;

    let mut graph = WeightedGraph::new();
    let mut stats = CorpusStats::new();
    for round in &sampled.rounds {
        let outcome =
            index_training_round(round, &sampled.labels, &mut stats, &gateway, config.workers)?;
        graph = merge_round(graph, outcome.subgraph)?;
        println!(
            "round {}: {} nodes, {} edges",
            round.round,
            graph.node_count(),
            graph.edge_count()
        );
    }
    graph.save(graph_path)?;
    stats.save(stats_path)?;
    println!("graph: {}", graph_path.display());
    println!("stats: {}", stats_path.display());
    Ok(())
}

fn retrieve(graph_path: &Path, keywords: &str, paths: PathDomain, unit_weights: bool) -> Result<()> {
    let graph = WeightedGraph::load(graph_path)?;
    let keywords = parse_keyword_reply(keywords);
    let terminals = split_keywords(&graph, &keywords);
    let options = RetrievalOptions {
        paths,
        unit_weights,
    };
    let result = steiner_candidates(&graph, &terminals, &options)
        .context("retrieval failed")?;
    let out = serde_json::json!({
        "terminals": terminals,
        "result": result,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn classify(
    config_path: &Path,
    graph_path: &Path,
    stats_path: &Path,
    text: Option<String>,
) -> Result<()> {
    let config = RunConfig::load(config_path)
        .with_context(|| format!("loading config {}", config_path.display()))?;
    let mut graph = WeightedGraph::load(graph_path)?;
    let mut stats = CorpusStats::load(stats_path)?;
    let body = match text {
        Some(t) => t,
        None => {
            use std::io::Read;
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
            buf
        }
    };
    anyhow::ensure!(!body.trim().is_empty(), "nothing to classify");

    let plan = load_dataset(&config.dataset, config.format)?;
    let fixture: Vec<TextDoc> = plan
        .rounds
        .iter()
        .flat_map(|r| r.train.values().flatten().chain(r.test.iter()))
        .cloned()
        .collect();
    let gateway = config.build_gateway(&fixture)?;

    let doc = TextDoc::new("query", body, None);
    let round = graph.round();
    let mut cache = BTreeMap::new();
    let outcome = classify_text(
        &mut graph,
        &mut stats,
        &gateway,
        &doc,
        round,
        config.ablation,
        config.paths,
        false,
        &mut cache,
    )?;
    println!("{}", serde_json::to_string_pretty(&outcome.record)?);
    Ok(())
}

fn graph_stats(graph_path: &Path, json: bool) -> Result<()> {
    let graph = WeightedGraph::load(graph_path)?;
    let keyword_label = graph
        .edges_iter()
        .filter(|e| e.kind == EdgeKind::KeywordLabel)
        .count();
    let occurrences: usize = graph.edges_iter().map(|e| e.occurrences.len()).sum();
    let (mut min_w, mut max_w) = (f64::INFINITY, f64::NEG_INFINITY);
    for e in graph.edges_iter() {
        min_w = min_w.min(e.weight);
        max_w = max_w.max(e.weight);
    }
    if json {
        let out = serde_json::json!({
            "round": graph.round(),
            "nodes": graph.node_count(),
            "labels": graph.label_count(),
            "keywords": graph.node_count() - graph.label_count(),
            "edges": graph.edge_count(),
            "keyword_label_edges": keyword_label,
            "label_label_edges": graph.cross_label_edge_count(),
            "occurrences": occurrences,
            "min_edge_weight": if graph.edge_count() == 0 { None } else { Some(min_w) },
            "max_edge_weight": if graph.edge_count() == 0 { None } else { Some(max_w) },
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("round:              {}", graph.round());
        println!(
            "nodes:              {} ({} labels, {} keywords)",
            graph.node_count(),
            graph.label_count(),
            graph.node_count() - graph.label_count()
        );
        println!(
            "edges:              {} ({} keyword-label, {} label-label)",
            graph.edge_count(),
            keyword_label,
            graph.cross_label_edge_count()
        );
        println!("occurrences:        {occurrences}");
        if graph.edge_count() > 0 {
            println!("edge weight range:  [{min_w:.6}, {max_w:.6}]");
        }
    }
    Ok(())
}

fn synth(out_dir: &Path, spec: SynthSpec) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let output = gorag_core::harness::synth::generate(&spec);
    let dataset_path = out_dir.join("dataset.jsonl");
    write_dataset(&output.records, &dataset_path)?;
    let mut config = output.to_run_config("dataset.jsonl");
    // The generated config must run as-is: never ask for more shots than the
    // dataset holds per label.
    config.k_shot = config.k_shot.min(spec.train_per_label);
    config.out_dir = Some(PathBuf::from("out"));
    let config_path = out_dir.join("run.toml");
    config.save(&config_path)?;
    println!(
        "dataset: {} ({} records)",
        dataset_path.display(),
        output.records.len()
    );
    println!("config:  {}", config_path.display());
    Ok(())
}

//! Executing a full run from a config.
//!
//! Per round, in order: index and merge the round's training texts, evaluate
//! the round's own test texts (online indexing on, unless ablated), then
//! re-evaluate every earlier round's test texts against the grown graph.
//! Under the default `round_end` policy re-evaluations are read-only; under
//! `current` they keep growing the graph too. Metrics snapshot per round:
//! once over the round's own tests, once over everything evaluated at that
//! round.
//!
//! With an output directory set, the run writes `report.json` (canonical,
//! timing-free, byte-stable), `report.txt`, `results.jsonl` (one record per
//! evaluation, in evaluation order), `timings.json`, `stats.json`, and one
//! graph file per round under `graphs/`. A run that aborts partway still
//! writes what it has, marked incomplete.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use super::config::{EvalGraph, RunConfig};
use super::metrics::{compute_metrics, Metrics};
use super::report::{RoundReport, RoundTiming, RunReport, RunTimings, REPORT_SCHEMA_VERSION};
use super::HarnessError;
use crate::classify::{classify_text, CandidateSource, OutcomeRecord};
use crate::corpus::{load_dataset, sample_k_shot, CorpusStats, RoundPlan, TextDoc};
use crate::graph::{index_training_round, merge_round, WeightedGraph};
use crate::llm::{BackendKind, Gateway, MOCK_RULE_VERSION, TEMPLATE_VERSION};

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub records: Vec<OutcomeRecord>,
    pub timings: RunTimings,
    pub graph: WeightedGraph,
    pub stats: CorpusStats,
}

/// Run the whole pipeline a config describes. On an error partway through,
/// whatever finished is still written to the output directory (marked
/// incomplete) before the error returns.
pub fn execute_run(config: &RunConfig) -> Result<RunOutcome, HarnessError> {
    let plan = load_dataset(&config.dataset, config.format)?;
    let sampled = sample_k_shot(&plan, config.k_shot, config.seed)?;
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let graphs = dir.join("graphs");
        std::fs::create_dir_all(&graphs).map_err(|e| HarnessError::io(&graphs, e))?;
    }
    let fixture: Vec<TextDoc> = plan
        .rounds
        .iter()
        .flat_map(|r| r.train.values().flatten().chain(r.test.iter()))
        .cloned()
        .collect();
    let gateway = config.build_gateway(&fixture)?;

    let mut state = RunState {
        config,
        plan: &sampled,
        gateway: &gateway,
        graph: WeightedGraph::empty_round(0),
        stats: CorpusStats::new(),
        cache: BTreeMap::new(),
        records: Vec::new(),
        rounds: Vec::new(),
        timings: Vec::new(),
    };
    let started = Instant::now();
    let error = run_rounds(&mut state).err();
    let complete = error.is_none();

    let overall = state.rounds.last().map(|r| r.metrics_cumulative.clone());
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        complete,
        seed: config.seed,
        k_shot: config.k_shot,
        ablation: config.ablation,
        paths: config.paths,
        eval_graph: config.eval_graph,
        backend: gateway.kind(),
        mock_rule_version: match gateway.kind() {
            BackendKind::Mock => Some(MOCK_RULE_VERSION.to_string()),
            BackendKind::Http => None,
        },
        template_version: TEMPLATE_VERSION.to_string(),
        rounds: state.rounds,
        overall,
    };
    let timings = RunTimings {
        total_ms: started.elapsed().as_millis() as u64,
        rounds: state.timings,
    };

    if let Some(dir) = &config.out_dir {
        write_outputs(dir, &report, &state.records, &timings, &state.stats)?;
    }
    match error {
        Some(e) => Err(e),
        None => Ok(RunOutcome {
            report,
            records: state.records,
            timings,
            graph: state.graph,
            stats: state.stats,
        }),
    }
}

struct RunState<'a> {
    config: &'a RunConfig,
    plan: &'a RoundPlan,
    gateway: &'a Gateway,
    graph: WeightedGraph,
    stats: CorpusStats,
    cache: BTreeMap<String, Vec<String>>,
    records: Vec<OutcomeRecord>,
    rounds: Vec<RoundReport>,
    timings: Vec<RoundTiming>,
}

fn run_rounds(state: &mut RunState<'_>) -> Result<(), HarnessError> {
    for spec in &state.plan.rounds {
        let index_started = Instant::now();
        let indexed = index_training_round(
            spec,
            &state.plan.labels,
            &mut state.stats,
            state.gateway,
            state.config.workers,
        )?;
        let base = std::mem::replace(&mut state.graph, WeightedGraph::empty_round(0));
        state.graph = merge_round(base, indexed.subgraph)?;
        let index_ms = index_started.elapsed().as_millis() as u64;
        let nodes_indexed = state.graph.node_count();
        let edges_indexed = state.graph.edge_count();

        let eval_started = Instant::now();
        let first_record = state.records.len();
        for doc in &spec.test {
            let outcome = classify_text(
                &mut state.graph,
                &mut state.stats,
                state.gateway,
                doc,
                spec.round,
                state.config.ablation,
                state.config.paths,
                true,
                &mut state.cache,
            )?;
            state.records.push(outcome.record);
        }
        let current_range = first_record..state.records.len();
        let reeval_online = state.config.eval_graph == EvalGraph::Current;
        for prior in state.plan.rounds.iter().filter(|p| p.round < spec.round) {
            for doc in &prior.test {
                let outcome = classify_text(
                    &mut state.graph,
                    &mut state.stats,
                    state.gateway,
                    doc,
                    prior.round,
                    state.config.ablation,
                    state.config.paths,
                    reeval_online,
                    &mut state.cache,
                )?;
                state.records.push(outcome.record);
            }
        }
        let evaluate_ms = eval_started.elapsed().as_millis() as u64;

        let current = &state.records[current_range.clone()];
        let evaluated_this_round = &state.records[first_record..];
        let mean_candidates = if current.is_empty() {
            0.0
        } else {
            current.iter().map(|r| r.candidates.len()).sum::<usize>() as f64
                / current.len() as f64
        };
        state.rounds.push(RoundReport {
            round: spec.round,
            labels_total: state.graph.label_count(),
            labels_new: spec.new_labels.len(),
            train_texts: spec.train.values().map(Vec::len).sum(),
            test_texts: spec.test.len(),
            graph_nodes_indexed: nodes_indexed,
            graph_edges_indexed: edges_indexed,
            graph_nodes_end: state.graph.node_count(),
            graph_edges_end: state.graph.edge_count(),
            cross_label_edges: state.graph.cross_label_edge_count(),
            metrics_current: compute_metrics(current),
            metrics_cumulative: compute_metrics(evaluated_this_round),
            mean_candidates,
            full_fallback_count: current
                .iter()
                .filter(|r| r.candidate_source == CandidateSource::FullLabelSet)
                .count(),
            extraction_failures: indexed.extraction_failures,
        });
        state.timings.push(RoundTiming {
            round: spec.round,
            index_ms,
            evaluate_ms,
        });
        if let Some(dir) = &state.config.out_dir {
            let path = dir.join("graphs").join(format!("round-{}.json", spec.round));
            state.graph.save(&path)?;
        }
    }
    Ok(())
}

fn write_outputs(
    dir: &Path,
    report: &RunReport,
    records: &[OutcomeRecord],
    timings: &RunTimings,
    stats: &CorpusStats,
) -> Result<(), HarnessError> {
    let write = |name: &str, contents: &str| -> Result<(), HarnessError> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))
    };
    write("report.json", &report.to_json())?;
    write("report.txt", &report.render_text())?;
    let mut lines = String::new();
    for rec in records {
        lines.push_str(&serde_json::to_string(rec).expect("record serialize"));
        lines.push('\n');
    }
    write("results.jsonl", &lines)?;
    let mut timings_json = serde_json::to_string_pretty(timings).expect("timings serialize");
    timings_json.push('\n');
    write("timings.json", &timings_json)?;
    stats.save(&dir.join("stats.json"))?;
    Ok(())
}

/// Accuracy over the full run, reading the final round's cumulative metrics.
pub fn overall_metrics(report: &RunReport) -> Option<&Metrics> {
    report.overall.as_ref()
}

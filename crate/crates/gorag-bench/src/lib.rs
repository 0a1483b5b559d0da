//! Shared fixtures for the benchmark targets.

use gorag_core::retrieval::synthgraph::scale_graph;
use gorag_core::retrieval::TerminalSet;
use gorag_core::WeightedGraph;

/// A connected graph of roughly `nodes` nodes with the label/keyword shape
/// the retrieval path sees in production: 2% labels, every keyword tied to
/// two labels.
pub fn graph_of_size(nodes: usize, seed: u64) -> WeightedGraph {
    let labels = (nodes / 50).max(4);
    let keywords = nodes.saturating_sub(labels);
    scale_graph(labels, keywords, seed)
}

/// Deterministic query terminals: `count` keyword nodes spread evenly over
/// the key space, which touches labels across the whole graph.
pub fn spread_terminals(graph: &WeightedGraph, count: usize) -> TerminalSet {
    let keywords: Vec<String> = graph
        .node_keys()
        .filter(|k| !graph.is_label(k))
        .map(str::to_string)
        .collect();
    let step = (keywords.len() / count).max(1);
    TerminalSet {
        exist: keywords.iter().step_by(step).take(count).cloned().collect(),
        not_exist: Vec::new(),
    }
}

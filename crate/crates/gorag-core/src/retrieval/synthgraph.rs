//! Seeded synthetic graphs for retrieval tests and benchmarks.
//!
//! Graphs follow the real shape (a connected backbone of label nodes with
//! keyword nodes attached to one or more labels) but with weights drawn from
//! a seeded generator, so Steiner behavior can be measured on arbitrarily
//! many reproducible instances.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TerminalSet;
use crate::corpus::LabelDef;
use crate::graph::WeightedGraph;

fn label_def(id: &str) -> LabelDef {
    LabelDef {
        id: id.to_string(),
        name: None,
        round_introduced: 1,
    }
}

fn random_weight(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.05..=1.0)
}

/// Small random connected graph with at most `max_nodes` nodes: a random
/// label backbone tree, a few extra label edges, and keywords attached to
/// one or two labels each.
pub fn random_small_graph(seed: u64, max_nodes: usize) -> WeightedGraph {
    assert!(max_nodes >= 4, "need room for 2 labels and 2 keywords");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = rng.gen_range(4..=max_nodes);
    let num_labels = rng.gen_range(2..=4.min(total - 2));
    let num_keywords = total - num_labels;

    let mut g = WeightedGraph::empty_round(1);
    let labels: Vec<String> = (0..num_labels).map(|i| format!("y{i}")).collect();
    for id in &labels {
        g.add_label(&label_def(id), vec![]);
    }
    // Random backbone tree over the labels.
    for i in 1..num_labels {
        let parent = rng.gen_range(0..i);
        g.add_connectivity_edge(&labels[i], &labels[parent], random_weight(&mut rng));
    }
    // Occasional extra label edges, so the backbone is not always a tree.
    for i in 0..num_labels {
        for j in i + 1..num_labels {
            if rng.gen_bool(0.3) {
                g.add_connectivity_edge(&labels[i], &labels[j], random_weight(&mut rng));
            }
        }
    }
    let mut text_counter = 0u32;
    for k in 0..num_keywords {
        let kw = format!("k{k}");
        let first = rng.gen_range(0..num_labels);
        let w = random_weight(&mut rng);
        g.record_occurrence(&kw, &labels[first], &format!("t{text_counter}"), 1.0 - w)
            .expect("labels exist");
        text_counter += 1;
        if num_labels > 1 && rng.gen_bool(0.4) {
            let mut second = rng.gen_range(0..num_labels);
            if second == first {
                second = (second + 1) % num_labels;
            }
            let w2 = random_weight(&mut rng);
            g.record_occurrence(&kw, &labels[second], &format!("t{text_counter}"), 1.0 - w2)
                .expect("labels exist");
            text_counter += 1;
        }
    }
    debug_assert!(g.node_count() <= max_nodes);
    g
}

/// Sample 1 to `max_terminals` distinct node keys from the graph.
pub fn random_terminals(graph: &WeightedGraph, seed: u64, max_terminals: usize) -> TerminalSet {
    let keys: Vec<&str> = graph.node_keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=max_terminals.min(keys.len()));
    let mut picked: Vec<usize> = sample(&mut rng, keys.len(), count).into_vec();
    picked.sort_unstable();
    TerminalSet {
        exist: picked.into_iter().map(|i| keys[i].to_string()).collect(),
        not_exist: vec![],
    }
}

/// Large connected graph for scaling runs: a label chain backbone with extra
/// shortcut edges, and every keyword attached to two distinct labels.
pub fn scale_graph(num_labels: usize, num_keywords: usize, seed: u64) -> WeightedGraph {
    assert!(num_labels >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = WeightedGraph::empty_round(1);
    let labels: Vec<String> = (0..num_labels).map(|i| format!("y{i:04}")).collect();
    for id in &labels {
        g.add_label(&label_def(id), vec![]);
    }
    for i in 1..num_labels {
        g.add_connectivity_edge(&labels[i], &labels[i - 1], random_weight(&mut rng));
    }
    for _ in 0..num_labels {
        let a = rng.gen_range(0..num_labels);
        let b = rng.gen_range(0..num_labels);
        if a != b {
            g.add_connectivity_edge(&labels[a], &labels[b], random_weight(&mut rng));
        }
    }
    let mut text_counter = 0u32;
    for k in 0..num_keywords {
        let kw = format!("kw{k:06}");
        let first = rng.gen_range(0..num_labels);
        let mut second = rng.gen_range(0..num_labels);
        if second == first {
            second = (second + 1) % num_labels;
        }
        for lab in [first, second] {
            let w = random_weight(&mut rng);
            g.record_occurrence(&kw, &labels[lab], &format!("t{text_counter}"), 1.0 - w)
                .expect("labels exist");
            text_counter += 1;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::{steiner_candidates, RetrievalOptions};

    #[test]
    fn small_graphs_are_connected_and_bounded() {
        for seed in 0..25 {
            let g = random_small_graph(seed, 12);
            assert!(g.node_count() >= 4 && g.node_count() <= 12, "seed {seed}");
            let terminals = random_terminals(&g, seed ^ 0xabcd, 4);
            // Connectivity: any terminal set must retrieve without error.
            steiner_candidates(&g, &terminals, &RetrievalOptions::default())
                .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_small_graph(7, 12);
        let b = random_small_graph(7, 12);
        assert_eq!(a.to_json(), b.to_json());
        let ta = random_terminals(&a, 99, 4);
        let tb = random_terminals(&b, 99, 4);
        assert_eq!(ta, tb);
    }

    #[test]
    fn scale_graph_hits_requested_node_count() {
        let g = scale_graph(10, 90, 3);
        assert_eq!(g.node_count(), 100);
        assert_eq!(g.label_count(), 10);
        let terminals = random_terminals(&g, 5, 6);
        steiner_candidates(&g, &terminals, &RetrievalOptions::default()).unwrap();
    }
}
